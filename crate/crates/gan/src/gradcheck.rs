//! Central finite-difference check of the analytic gradients, run in `f64`
//! on a reduced network.

use crate::layers::{Pass, Role};
use crate::model::{Discriminator, DiscriminatorConfig, Generator, GeneratorConfig};
use crate::tensor::Tensor;
use crate::train::{discriminator_objective, generator_objective};
use crate::Result;
use emgscrub_core::rng::{stream, Domain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub base_channels: usize,
    pub n_resnet_blocks: usize,
    pub image_side: usize,
    pub batch: usize,
    pub l1_weight: f64,
    pub dropout: f64,
    /// Parameters sampled per objective.
    pub samples: usize,
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            base_channels: 8,
            n_resnet_blocks: 1,
            image_side: 8,
            batch: 4,
            l1_weight: 100.0,
            dropout: 0.5,
            samples: 250,
            step: 1e-6,
            tolerance: 1e-3,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub objective: &'static str,
    pub checked: usize,
    pub passed: usize,
    pub worst: f64,
    pub median: f64,
}

impl GradCheckReport {
    pub fn pass_rate(&self) -> f64 {
        self.passed as f64 / self.checked.max(1) as f64
    }
}

/// `|a − n| / max(|a|, |n|)`, with a floor so that parameters whose true
/// gradient is zero do not divide by rounding noise.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7)
}

struct Fixture {
    g: Generator<f64>,
    d: Discriminator<f64>,
    cond: Tensor<f64>,
    target: Tensor<f64>,
    fake: Tensor<f64>,
}

fn fixture(cfg: &GradCheckConfig) -> Result<Fixture> {
    let gcfg = GeneratorConfig {
        base_channels: cfg.base_channels,
        max_channels: 4 * cfg.base_channels,
        n_resnet_blocks: cfg.n_resnet_blocks,
        dropout: cfg.dropout,
        image_side: cfg.image_side,
        ..GeneratorConfig::default()
    };
    let dcfg = DiscriminatorConfig {
        base_channels: cfg.base_channels,
        max_channels: 8 * cfg.base_channels,
        image_side: cfg.image_side,
        ..DiscriminatorConfig::default()
    };
    let g = Generator::new(gcfg, &mut stream(cfg.seed, Domain::WeightInit, 0))?;
    let d = Discriminator::new(dcfg, &mut stream(cfg.seed, Domain::WeightInit, 1))?;
    let mut rng = stream(cfg.seed, Domain::Fixture, 0);
    let shape = [1, cfg.batch, cfg.image_side, cfg.image_side];
    let mut image = || {
        let n = shape.iter().product();
        Tensor::from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), shape)
    };
    Ok(Fixture {
        g,
        d,
        cond: image(),
        target: image(),
        fake: image(),
    })
}

fn dropout_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, Domain::Dropout, 0)
}

type VisitFn<'m> = dyn FnMut(&mut dyn FnMut(&str, &mut crate::layers::Param<f64>, Role)) + 'm;

/// Flat indices of trainable scalars, drawn tensor-first so that small
/// tensors (biases, norm scales) are represented alongside large kernels.
fn pick(visit: &mut VisitFn<'_>, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut tensors = Vec::new();
    let mut offset = 0;
    visit(&mut |_, p, role| {
        if role == Role::Trainable {
            tensors.push((offset, p.len()));
            offset += p.len();
        }
    });
    let count = count.min(offset);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (start, len) = tensors[rng.random_range(0..tensors.len())];
        let flat = start + rng.random_range(0..len);
        if seen.insert(flat) {
            out.push(flat);
        } else if seen.len() == offset {
            break;
        }
    }
    out
}

/// Read the gradient of, or add `delta` to, the `flat`-th trainable scalar.
fn touch(visit: &mut VisitFn<'_>, flat: usize, delta: f64) -> f64 {
    let mut offset = 0;
    let mut grad = 0.0;
    visit(&mut |_, p, role| {
        if role != Role::Trainable {
            return;
        }
        if (offset..offset + p.len()).contains(&flat) {
            p.value[flat - offset] += delta;
            grad = p.grad[flat - offset];
        }
        offset += p.len();
    });
    grad
}

fn report(objective: &'static str, errors: Vec<f64>, tolerance: f64) -> GradCheckReport {
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    GradCheckReport {
        objective,
        checked: errors.len(),
        passed: errors.iter().filter(|&&e| e < tolerance).count(),
        worst: sorted.last().copied().unwrap_or(0.0),
        median: sorted.get(sorted.len() / 2).copied().unwrap_or(0.0),
    }
}

/// Generator parameters against `adv + λ·L1`, with the dropout masks held
/// fixed across evaluations.
pub fn check_generator(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let Fixture {
        mut g,
        mut d,
        cond,
        target,
        ..
    } = fixture(cfg)?;
    let loss = |g: &mut Generator<f64>, d: &mut Discriminator<f64>| -> Result<f64> {
        g.zero_grad();
        d.zero_grad();
        let mut rng = dropout_rng(cfg.seed);
        let mut pass = Pass {
            train: true,
            rng: &mut rng,
        };
        Ok(generator_objective(g, d, &cond, &target, cfg.l1_weight, &mut pass)?.total)
    };
    loss(&mut g, &mut d)?;
    let mut analytic_model = g.clone();
    let picks = pick(&mut |f| g.visit(f), cfg.samples, &mut stream(cfg.seed, Domain::Fixture, 1));
    let mut errors = Vec::with_capacity(picks.len());
    for flat in picks {
        let analytic = touch(&mut |f| analytic_model.visit(f), flat, 0.0);
        touch(&mut |f| g.visit(f), flat, cfg.step);
        let plus = loss(&mut g, &mut d)?;
        touch(&mut |f| g.visit(f), flat, -2.0 * cfg.step);
        let minus = loss(&mut g, &mut d)?;
        touch(&mut |f| g.visit(f), flat, cfg.step);
        errors.push(relative_error(analytic, (plus - minus) / (2.0 * cfg.step)));
    }
    Ok(report("generator objective", errors, cfg.tolerance))
}

/// Discriminator parameters against its real/fake cross-entropy.
pub fn check_discriminator(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let Fixture {
        mut d,
        cond,
        target,
        fake,
        ..
    } = fixture(cfg)?;
    let loss = |d: &mut Discriminator<f64>| -> Result<f64> {
        d.zero_grad();
        let mut rng = dropout_rng(cfg.seed);
        let mut pass = Pass {
            train: true,
            rng: &mut rng,
        };
        discriminator_objective(d, &cond, &target, &fake, &mut pass)
    };
    loss(&mut d)?;
    let mut analytic_model = d.clone();
    let picks = pick(&mut |f| d.visit(f), cfg.samples, &mut stream(cfg.seed, Domain::Fixture, 2));
    let mut errors = Vec::with_capacity(picks.len());
    for flat in picks {
        let analytic = touch(&mut |f| analytic_model.visit(f), flat, 0.0);
        touch(&mut |f| d.visit(f), flat, cfg.step);
        let plus = loss(&mut d)?;
        touch(&mut |f| d.visit(f), flat, -2.0 * cfg.step);
        let minus = loss(&mut d)?;
        touch(&mut |f| d.visit(f), flat, cfg.step);
        errors.push(relative_error(analytic, (plus - minus) / (2.0 * cfg.step)));
    }
    Ok(report("discriminator loss", errors, cfg.tolerance))
}
