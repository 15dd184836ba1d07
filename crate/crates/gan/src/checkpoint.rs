//! Versioned checkpoint container.
//!
//! ```text
//! magic   b"EMGSCKPT"
//! version u32 LE
//! hlen    u64 LE
//! header  hlen bytes of JSON: format tag, configs, epoch, RNG state,
//!         loss history, optimizer step counts, tensor index
//! payload f32 LE values of every tensor, in index order
//! ```
//!
//! Tensor names are `generator.*` / `discriminator.*` for parameters and
//! batch-norm buffers and `adam_g.<param>.{m,v}` / `adam_d.<param>.{m,v}`
//! for optimizer moments.

use crate::layers::Role;
use crate::model::{Discriminator, DiscriminatorConfig, Generator, GeneratorConfig};
use crate::optim::Adam;
use crate::train::{EpochStats, TrainConfig};
use crate::{GanError, Result};
use emgscrub_core::rng::{stream, Domain};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"EMGSCKPT";
pub const FORMAT_TAG: &str = "emgscrub-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

/// Exact position of a ChaCha stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed_hex: String,
    pub stream: u64,
    /// `u128` word position, as a decimal string.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed_hex: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = self
                .seed_hex
                .get(2 * i..2 * i + 2)
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .unwrap_or(0);
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos.parse().unwrap_or(0));
        rng
    }

    fn validate(&self) -> Result<()> {
        let hex_ok = self.seed_hex.len() == 64 && self.seed_hex.chars().all(|c| c.is_ascii_hexdigit());
        if !hex_ok || self.word_pos.parse::<u128>().is_err() {
            return Err(GanError::Incompatible("malformed RNG state".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub generator: GeneratorConfig,
    pub discriminator: DiscriminatorConfig,
    pub train: TrainConfig,
    pub epoch: usize,
    pub rng: RngState,
    pub history: Vec<EpochStats>,
    pub adam_g_step: u64,
    pub adam_d_step: u64,
    pub tensors: Vec<NamedTensor>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    generator: GeneratorConfig,
    discriminator: DiscriminatorConfig,
    train: TrainConfig,
    epoch: usize,
    rng: RngState,
    history: Vec<EpochStats>,
    adam_g_step: u64,
    adam_d_step: u64,
    tensors: Vec<TensorEntry>,
}

fn push_model(out: &mut Vec<NamedTensor>, visit: impl FnOnce(&mut crate::layers::Visitor<'_, f32>)) {
    visit(&mut |name, p, _| {
        out.push(NamedTensor {
            name: name.to_owned(),
            shape: p.shape.clone(),
            data: p.value.clone(),
        })
    });
}

fn push_moments(
    out: &mut Vec<NamedTensor>,
    prefix: &str,
    opt: &Adam<f32>,
    visit: impl FnOnce(&mut crate::layers::Visitor<'_, f32>),
) {
    let mut i = 0;
    visit(&mut |name, p, role| {
        if role != Role::Trainable {
            return;
        }
        if let Some((m, v)) = opt.moments.get(i) {
            for (suffix, data) in [("m", m), ("v", v)] {
                out.push(NamedTensor {
                    name: format!("{prefix}.{name}.{suffix}"),
                    shape: p.shape.clone(),
                    data: data.clone(),
                });
            }
        }
        i += 1;
    });
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn capture(
        g: &mut Generator<f32>,
        d: &mut Discriminator<f32>,
        opt_g: &Adam<f32>,
        opt_d: &Adam<f32>,
        train: &TrainConfig,
        epoch: usize,
        rng: RngState,
        history: &[EpochStats],
    ) -> Self {
        let mut tensors = Vec::new();
        push_model(&mut tensors, |f| g.visit(f));
        push_model(&mut tensors, |f| d.visit(f));
        push_moments(&mut tensors, "adam_g", opt_g, |f| g.visit(f));
        push_moments(&mut tensors, "adam_d", opt_d, |f| d.visit(f));
        Checkpoint {
            generator: g.config.clone(),
            discriminator: d.config.clone(),
            train: train.clone(),
            epoch,
            rng,
            history: history.to_vec(),
            adam_g_step: opt_g.step,
            adam_d_step: opt_d.step,
            tensors,
        }
    }

    fn index(&self) -> BTreeMap<&str, &NamedTensor> {
        self.tensors.iter().map(|t| (t.name.as_str(), t)).collect()
    }

    fn fill(
        index: &BTreeMap<&str, &NamedTensor>,
        prefix: &str,
        visit: impl FnOnce(&mut crate::layers::Visitor<'_, f32>),
    ) -> Result<()> {
        let mut error = None;
        let mut seen = 0;
        visit(&mut |name, p, _| {
            if error.is_some() {
                return;
            }
            match index.get(name) {
                Some(t) if t.shape == p.shape && t.data.len() == p.len() => {
                    p.value.copy_from_slice(&t.data);
                    seen += 1;
                }
                Some(t) => {
                    error = Some(format!(
                        "tensor {name} has shape {:?}, architecture expects {:?}",
                        t.shape, p.shape
                    ))
                }
                None => error = Some(format!("tensor {name} missing")),
            }
        });
        if let Some(e) = error {
            return Err(GanError::Incompatible(e));
        }
        let stored = index.keys().filter(|k| k.starts_with(prefix)).count();
        if stored != seen {
            return Err(GanError::Incompatible(format!(
                "{stored} stored {prefix}* tensors, architecture has {seen}"
            )));
        }
        Ok(())
    }

    /// Rebuild both networks from their stored configuration and tensors.
    pub fn models(&self) -> Result<(Generator<f32>, Discriminator<f32>)> {
        let index = self.index();
        let mut g = Generator::new(self.generator.clone(), &mut stream(0, Domain::WeightInit, 0))
            .map_err(|e| GanError::Incompatible(e.to_string()))?;
        let mut d = Discriminator::new(self.discriminator.clone(), &mut stream(0, Domain::WeightInit, 1))
            .map_err(|e| GanError::Incompatible(e.to_string()))?;
        Self::fill(&index, "generator.", |f| g.visit(f))?;
        Self::fill(&index, "discriminator.", |f| d.visit(f))?;
        Ok((g, d))
    }

    pub fn generator_model(&self) -> Result<Generator<f32>> {
        let index = self.index();
        let mut g = Generator::new(self.generator.clone(), &mut stream(0, Domain::WeightInit, 0))
            .map_err(|e| GanError::Incompatible(e.to_string()))?;
        Self::fill(&index, "generator.", |f| g.visit(f))?;
        Ok(g)
    }

    pub(crate) fn optimizers(
        &self,
        g: &Generator<f32>,
        d: &Discriminator<f32>,
    ) -> Result<(Adam<f32>, Adam<f32>)> {
        let index = self.index();
        let restore = |prefix: &str, step: u64, names: Vec<String>| -> Result<Adam<f32>> {
            let mut opt = Adam::new(
                self.train.learning_rate,
                self.train.adam_beta1,
                self.train.adam_beta2,
            );
            opt.step = step;
            if step == 0 {
                return Ok(opt);
            }
            for name in names {
                let get = |s: &str| {
                    index
                        .get(format!("{prefix}.{name}.{s}").as_str())
                        .map(|t| t.data.clone())
                        .ok_or_else(|| GanError::Incompatible(format!("optimizer state for {name} missing")))
                };
                opt.moments.push((get("m")?, get("v")?));
            }
            Ok(opt)
        };
        let names = |visit: &mut dyn FnMut(&mut crate::layers::Visitor<'_, f32>)| {
            let mut out = Vec::new();
            visit(&mut |name, _, role| {
                if role == Role::Trainable {
                    out.push(name.to_owned())
                }
            });
            out
        };
        let (mut g, mut d) = (g.clone(), d.clone());
        let g_names = names(&mut |f| g.visit(f));
        let d_names = names(&mut |f| d.visit(f));
        Ok((
            restore("adam_g", self.adam_g_step, g_names)?,
            restore("adam_d", self.adam_d_step, d_names)?,
        ))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut offset = 0;
        let entries = self
            .tensors
            .iter()
            .map(|t| {
                let e = TensorEntry {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    offset,
                    len: t.data.len(),
                };
                offset += t.data.len();
                e
            })
            .collect();
        let header = Header {
            format: FORMAT_TAG.to_owned(),
            version: FORMAT_VERSION,
            generator: self.generator.clone(),
            discriminator: self.discriminator.clone(),
            train: self.train.clone(),
            epoch: self.epoch,
            rng: self.rng.clone(),
            history: self.history.clone(),
            adam_g_step: self.adam_g_step,
            adam_d_step: self.adam_d_step,
            tensors: entries,
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(20 + json.len() + offset * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for t in &self.tensors {
            out.extend(t.data.iter().flat_map(|v| v.to_le_bytes()));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| GanError::Incompatible(m.to_owned());
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(bad("not an emgscrub checkpoint"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(GanError::Incompatible(format!(
                "checkpoint format version {version}, this build reads {FORMAT_VERSION}"
            )));
        }
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let body = &bytes[20..];
        if hlen > body.len() {
            return Err(bad("truncated header"));
        }
        let header: Header = serde_json::from_slice(&body[..hlen])
            .map_err(|e| GanError::Incompatible(format!("unreadable header: {e}")))?;
        if header.format != FORMAT_TAG {
            return Err(GanError::Incompatible(format!("format tag {:?}", header.format)));
        }
        header.rng.validate()?;
        let payload = &body[hlen..];
        let total: usize = header.tensors.iter().map(|t| t.len).sum();
        if payload.len() != total * 4 {
            return Err(GanError::Incompatible(format!(
                "payload holds {} bytes, index describes {}",
                payload.len(),
                total * 4
            )));
        }
        let tensors = header
            .tensors
            .into_iter()
            .map(|e| {
                if e.shape.iter().product::<usize>() != e.len || e.offset + e.len > total {
                    return Err(GanError::Incompatible(format!("bad index entry for {}", e.name)));
                }
                let data = payload[e.offset * 4..(e.offset + e.len) * 4]
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                Ok(NamedTensor {
                    name: e.name,
                    shape: e.shape,
                    data,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Checkpoint {
            generator: header.generator,
            discriminator: header.discriminator,
            train: header.train,
            epoch: header.epoch,
            rng: header.rng,
            history: header.history,
            adam_g_step: header.adam_g_step,
            adam_d_step: header.adam_d_step,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| GanError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| GanError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
