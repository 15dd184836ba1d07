use crate::error::{CliError, Result};
use chrono::{SecondsFormat, Utc};
use emgscrub_core::dataset::sha256_hex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(FileDigest {
            path: path.to_owned(),
            sha256: sha256_hex(&bytes),
        })
    }
}

/// Everything needed to replay one subcommand invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    /// Output files relative to the output directory.
    pub outputs: Vec<FileDigest>,
    pub results: Value,
    pub started_at: String,
    pub finished_at: String,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn begin(subcommand: &str, config: &impl Serialize) -> Self {
        RunManifest {
            tool: "emgscrub".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            argv: std::env::args().collect(),
            config: serde_json::to_value(config).expect("config serializes"),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: Value::Null,
            started_at: now(),
            finished_at: String::new(),
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.into(), value);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    /// Record `rel` (relative to `out`) as an output.
    pub fn output(&mut self, out: &Path, rel: impl AsRef<Path>) -> Result<()> {
        let d = FileDigest::of(&out.join(rel.as_ref()))?;
        self.outputs.push(FileDigest {
            path: rel.as_ref().to_owned(),
            sha256: d.sha256,
        });
        Ok(())
    }

    pub fn finish(mut self, out: &Path) -> Result<Self> {
        self.finished_at = now();
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path,
            reason: e.to_string(),
        })
    }
}
