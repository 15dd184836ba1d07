//! Per-subcommand settings, layered as flags > config file > defaults.
//!
//! A config file is TOML (`.toml`) or JSON (anything else) with one table
//! per subcommand:
//!
//! ```toml
//! [train]
//! profile = "desk"
//! l1_weight = 100.0
//! seed = 7
//! ```

use crate::error::{CliError, Result};
use emgscrub_core::metrics::{PsdMethod, SpectralOptions, SpectralRange};
use emgscrub_gan::{DiscriminatorHead, TargetScale};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub snr_min: i32,
    pub snr_max: i32,
    pub expand: usize,
    pub train: usize,
    pub test: usize,
    pub seed: Option<u64>,
    pub shuffle: bool,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            snr_min: -7,
            snr_max: 2,
            expand: 5598,
            train: 5000,
            test: 598,
            seed: None,
            shuffle: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 20 epochs on 500 training pairs.
    #[default]
    Desk,
    /// 100 epochs on every training pair.
    Full,
}

impl Profile {
    pub fn epochs(self) -> usize {
        match self {
            Profile::Desk => 20,
            Profile::Full => 100,
        }
    }

    pub fn pairs(self) -> Option<usize> {
        match self {
            Profile::Desk => Some(500),
            Profile::Full => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub profile: Profile,
    /// Overrides the profile's epoch count.
    pub epochs: Option<usize>,
    /// Overrides the profile's training-pair count.
    pub pairs: Option<usize>,
    pub batch: usize,
    pub l1_weight: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub dropout: f64,
    pub seed: u64,
    pub base_channels: usize,
    pub resnet_blocks: usize,
    pub disc_base_channels: usize,
    pub disc_head: HeadKind,
    pub target_scale: ScaleKind,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            profile: Profile::Desk,
            epochs: None,
            pairs: None,
            batch: 64,
            l1_weight: 100.0,
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            dropout: 0.5,
            seed: 0,
            base_channels: 64,
            resnet_blocks: 6,
            disc_base_channels: 64,
            disc_head: HeadKind::Scalar,
            target_scale: ScaleKind::Contaminated,
        }
    }
}

impl TrainSettings {
    pub fn resolved_epochs(&self) -> usize {
        self.epochs.unwrap_or(self.profile.epochs())
    }

    pub fn resolved_pairs(&self) -> Option<usize> {
        self.pairs.or(self.profile.pairs())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    /// Clean targets on the contaminated input's amplitude range.
    #[default]
    Contaminated,
    /// Clean targets on their own range; outputs stretched to the input's.
    Own,
}

impl From<ScaleKind> for TargetScale {
    fn from(k: ScaleKind) -> Self {
        match k {
            ScaleKind::Contaminated => TargetScale::Contaminated,
            ScaleKind::Own => TargetScale::Own,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// One probability per image.
    #[default]
    Scalar,
    /// One probability per 4×4 feature location.
    Patch,
}

impl From<HeadKind> for DiscriminatorHead {
    fn from(h: HeadKind) -> Self {
        match h {
            HeadKind::Scalar => DiscriminatorHead::Scalar,
            HeadKind::Patch => DiscriminatorHead::Patch,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PsdKind {
    #[default]
    Welch,
    Periodogram,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RangeKind {
    #[default]
    Full,
    Eeg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub psd: PsdKind,
    pub welch_len: usize,
    pub welch_overlap: usize,
    pub spectral_range: RangeKind,
    /// SNR level for the band-ratio table; every level when absent from
    /// the test corpus.
    pub band_snr: i32,
    /// PSD overlay: record `segment` at level `plot_snr` (report only).
    pub segment: usize,
    pub plot_snr: i32,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            psd: PsdKind::Welch,
            welch_len: 256,
            welch_overlap: 128,
            spectral_range: RangeKind::Full,
            band_snr: -7,
            segment: 0,
            plot_snr: -7,
        }
    }
}

impl EvalSettings {
    pub fn psd_method(&self) -> PsdMethod {
        match self.psd {
            PsdKind::Welch => PsdMethod::Welch {
                segment_len: self.welch_len,
                overlap: self.welch_overlap,
            },
            PsdKind::Periodogram => PsdMethod::Periodogram,
        }
    }

    pub fn spectral(&self) -> SpectralOptions {
        SpectralOptions {
            method: self.psd_method(),
            range: match self.spectral_range {
                RangeKind::Full => SpectralRange::Full,
                RangeKind::Eeg => SpectralRange::Eeg,
            },
        }
    }
}

fn read_file(path: &Path, section: &str) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::Config {
        path: path.to_owned(),
        reason,
    };
    let root: Value = if path.extension().is_some_and(|e| e == "toml") {
        let t: toml::Table = toml::from_str(&text).map_err(|e| bad(e.to_string()))?;
        serde_json::to_value(t).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    match root.get(section) {
        None => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(bad(format!("[{section}] must be a table"))),
    }
}

/// Merge defaults, the file's `[section]` table and explicit flags.
pub fn resolve<T>(file: Option<&Path>, section: &str, flags: Map<String, Value>) -> Result<T>
where
    T: Default + Serialize + DeserializeOwned,
{
    let mut merged = match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("settings serialize to an object"),
    };
    if let Some(path) = file {
        let layer = read_file(path, section)?;
        for (k, v) in layer {
            if !merged.contains_key(&k) {
                return Err(CliError::Config {
                    path: path.to_owned(),
                    reason: format!("unknown key {section}.{k}"),
                });
            }
            merged.insert(k, v);
        }
    }
    merged.extend(flags);
    serde_json::from_value(Value::Object(merged)).map_err(|e| match file {
        Some(path) => CliError::Config {
            path: path.to_owned(),
            reason: e.to_string(),
        },
        None => CliError::Args(e.to_string()),
    })
}

/// Collects `Some` flag values into a JSON object for [`resolve`].
#[derive(Default)]
pub struct Flags(Map<String, Value>);

impl Flags {
    pub fn set<V: Serialize>(mut self, key: &str, value: Option<V>) -> Self {
        if let Some(v) = value {
            self.0.insert(key.to_owned(), serde_json::to_value(v).expect("flag serializes"));
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_resolve() {
        let desk = TrainSettings::default();
        assert_eq!((desk.resolved_epochs(), desk.resolved_pairs()), (20, Some(500)));
        let full = TrainSettings {
            profile: Profile::Full,
            ..TrainSettings::default()
        };
        assert_eq!((full.resolved_epochs(), full.resolved_pairs()), (100, None));
        let custom = TrainSettings {
            epochs: Some(3),
            ..full
        };
        assert_eq!(custom.resolved_epochs(), 3);
    }

    #[test]
    fn flags_override_defaults() {
        let s: SynthSettings = resolve(None, "synth", Flags::default().set("snr_min", Some(0)).into_map()).unwrap();
        assert_eq!(s.snr_min, 0);
        assert_eq!(s.expand, 5598);
        let s: SynthSettings = resolve(None, "synth", Flags::default().set::<i32>("snr_min", None).into_map()).unwrap();
        assert_eq!(s.snr_min, -7);
    }
}
