//! Adversarial training: per batch, one discriminator update on a real and a
//! detached fake pair, then one generator update on `adv + λ·L1`.

use crate::checkpoint::{Checkpoint, RngState};
use crate::layers::Pass;
use crate::loss::{bce, l1_grad, l1_loss, total_generator_loss, Target};
use crate::model::{Discriminator, DiscriminatorConfig, Generator, GeneratorConfig};
use crate::optim::Adam;
use crate::tensor::{Scalar, Tensor};
use crate::{GanError, Result};
use emgscrub_core::codec::{encode, encode_on, to_network_range, ScaleInfo, IMAGE_PIXELS, IMAGE_SIDE};
use emgscrub_core::rng::{stream, Domain};
use emgscrub_core::Segment;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Amplitude range the clean target image is expressed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetScale {
    /// The contaminated input's range. The generator predicts clean
    /// amplitude relative to its input, and outputs map back through the
    /// same affine transform.
    #[default]
    Contaminated,
    /// The clean segment's own range. Outputs are renormalized by their
    /// pixel extrema and stretched to the contaminated range.
    Own,
}

impl TargetScale {
    /// Target grid in `[−1, 1]` for a `(contaminated, clean)` pair.
    pub fn target_grid(self, contaminated: &Segment, clean: &Segment) -> Vec<f32> {
        match self {
            TargetScale::Contaminated => {
                to_network_range(&encode_on(clean, ScaleInfo::of(contaminated)))
                    .into_iter()
                    .map(|v| v as f32)
                    .collect()
            }
            TargetScale::Own => segment_grid(clean),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Weight of the L1 term in the generator objective.
    pub l1_weight: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dropout: f64,
    #[serde(default)]
    pub target_scale: TargetScale,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l1_weight: 100.0,
            learning_rate: 2e-4,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            batch_size: 64,
            epochs: 100,
            seed: 0,
            dropout: 0.5,
            target_scale: TargetScale::Contaminated,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GanError::Config(msg));
        if !(self.l1_weight >= 0.0 && self.l1_weight.is_finite()) {
            return bad(format!("l1_weight {} must be finite and >= 0", self.l1_weight));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be > 0", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} not in [0, 1)", self.dropout));
        }
        Ok(())
    }
}

/// Condition/target image pairs already mapped to `[−1, 1]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairedImages {
    cond: Vec<f32>,
    target: Vec<f32>,
}

impl PairedImages {
    /// Encode `(contaminated, clean)` segment pairs.
    pub fn from_segments<'a>(
        pairs: impl IntoIterator<Item = (&'a Segment, &'a Segment)>,
        scale: TargetScale,
    ) -> Self {
        let mut out = PairedImages::default();
        for (noisy, clean) in pairs {
            out.push(&segment_grid(noisy), &scale.target_grid(noisy, clean));
        }
        out
    }

    pub fn push(&mut self, cond: &[f32], target: &[f32]) {
        assert_eq!(cond.len(), IMAGE_PIXELS);
        assert_eq!(target.len(), IMAGE_PIXELS);
        self.cond.extend_from_slice(cond);
        self.target.extend_from_slice(target);
    }

    pub fn len(&self) -> usize {
        self.cond.len() / IMAGE_PIXELS
    }

    pub fn is_empty(&self) -> bool {
        self.cond.is_empty()
    }

    /// `(condition, target)` tensors for the given sample indices.
    pub fn batch(&self, indices: &[usize]) -> (Tensor<f32>, Tensor<f32>) {
        let gather = |src: &[f32]| {
            let mut data = Vec::with_capacity(indices.len() * IMAGE_PIXELS);
            for &i in indices {
                data.extend_from_slice(&src[i * IMAGE_PIXELS..(i + 1) * IMAGE_PIXELS]);
            }
            Tensor::from_vec(data, [1, indices.len(), IMAGE_SIDE, IMAGE_SIDE])
        };
        (gather(&self.cond), gather(&self.target))
    }
}

/// Segment → `[−1, 1]` image grid.
pub fn segment_grid(seg: &Segment) -> Vec<f32> {
    to_network_range(&encode(seg).0)
        .into_iter()
        .map(|v| v as f32)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorLosses {
    pub adv: f64,
    pub l1: f64,
    pub total: f64,
}

/// Forward the generator and the discriminator on `cond`, and backpropagate
/// `adv + l1_weight · L1(fake, target)` into the generator's gradients.
/// Discriminator gradients are accumulated as a side effect; callers that do
/// not want them must zero them.
pub fn generator_objective<T: Scalar>(
    g: &mut Generator<T>,
    d: &mut Discriminator<T>,
    cond: &Tensor<T>,
    target: &Tensor<T>,
    l1_weight: f64,
    pass: &mut Pass<'_>,
) -> Result<GeneratorLosses> {
    let fake = g.forward(cond, pass)?;
    generator_backward(g, d, cond, &fake, target, l1_weight, pass)
}

/// Second half of [`generator_objective`]: `fake` must be the output of the
/// generator's most recent forward pass.
pub fn generator_backward<T: Scalar>(
    g: &mut Generator<T>,
    d: &mut Discriminator<T>,
    cond: &Tensor<T>,
    fake: &Tensor<T>,
    target: &Tensor<T>,
    l1_weight: f64,
    pass: &mut Pass<'_>,
) -> Result<GeneratorLosses> {
    let probs = d.forward(cond, fake, pass)?;
    let (adv, dprobs) = bce(&probs, Target::Real);
    let l1 = l1_loss(&fake.data, &target.data)?;
    let mut dfake = d.backward(&dprobs);
    dfake.add_assign(&l1_grad(fake, target, l1_weight));
    g.backward(&dfake);
    Ok(GeneratorLosses {
        adv,
        l1,
        total: total_generator_loss(adv, l1, l1_weight),
    })
}

/// Backpropagate the discriminator loss for a real pair and a (detached)
/// fake pair into the discriminator's gradients.
pub fn discriminator_objective<T: Scalar>(
    d: &mut Discriminator<T>,
    cond: &Tensor<T>,
    real: &Tensor<T>,
    fake: &Tensor<T>,
    pass: &mut Pass<'_>,
) -> Result<f64> {
    let p_real = d.forward(cond, real, pass)?;
    let (loss_real, g_real) = bce(&p_real, Target::Real);
    d.backward(&g_real);
    let p_fake = d.forward(cond, fake, pass)?;
    let (loss_fake, g_fake) = bce(&p_fake, Target::Fake);
    d.backward(&g_fake);
    Ok(loss_real + loss_fake)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss_d: f64,
    pub loss_g_adv: f64,
    pub loss_l1: f64,
    pub loss_g_total: f64,
    pub d_steps: usize,
    pub g_steps: usize,
}

pub struct Trainer {
    pub generator: Generator<f32>,
    pub discriminator: Discriminator<f32>,
    pub config: TrainConfig,
    opt_g: Adam<f32>,
    opt_d: Adam<f32>,
    rng: ChaCha8Rng,
    epoch: usize,
    history: Vec<EpochStats>,
}

impl Trainer {
    pub fn new(
        mut gcfg: GeneratorConfig,
        dcfg: DiscriminatorConfig,
        config: TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        gcfg.dropout = config.dropout;
        let generator = Generator::new(gcfg, &mut stream(config.seed, Domain::WeightInit, 0))?;
        let discriminator = Discriminator::new(dcfg, &mut stream(config.seed, Domain::WeightInit, 1))?;
        Ok(Trainer {
            opt_g: Adam::new(config.learning_rate, config.adam_beta1, config.adam_beta2),
            opt_d: Adam::new(config.learning_rate, config.adam_beta1, config.adam_beta2),
            rng: stream(config.seed, Domain::Dropout, 0),
            generator,
            discriminator,
            config,
            epoch: 0,
            history: Vec::new(),
        })
    }

    /// Resume from a checkpoint, bit-for-bit.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (generator, discriminator) = ckpt.models()?;
        let (opt_g, opt_d) = ckpt.optimizers(&generator, &discriminator)?;
        Ok(Trainer {
            generator,
            discriminator,
            config: ckpt.train.clone(),
            opt_g,
            opt_d,
            rng: ckpt.rng.restore(),
            epoch: ckpt.epoch,
            history: ckpt.history.clone(),
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn history(&self) -> &[EpochStats] {
        &self.history
    }

    /// One batch: a discriminator step followed by a generator step.
    pub fn step(&mut self, cond: &Tensor<f32>, real: &Tensor<f32>) -> Result<(f64, GeneratorLosses)> {
        let mut pass = Pass {
            train: true,
            rng: &mut self.rng,
        };
        let fake = self.generator.forward(cond, &mut pass)?;
        self.discriminator.zero_grad();
        let loss_d = discriminator_objective(&mut self.discriminator, cond, real, &fake, &mut pass)?;
        let d = &mut self.discriminator;
        self.opt_d.update(|f| d.visit(f));

        self.generator.zero_grad();
        let losses = generator_backward(
            &mut self.generator,
            &mut self.discriminator,
            cond,
            &fake,
            real,
            self.config.l1_weight,
            &mut pass,
        )?;
        let g = &mut self.generator;
        self.opt_g.update(|f| g.visit(f));
        self.discriminator.zero_grad();
        Ok((loss_d, losses))
    }

    pub fn train_epoch(&mut self, data: &PairedImages) -> Result<EpochStats> {
        if data.is_empty() {
            return Err(GanError::EmptyDataset);
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut stream(self.config.seed, Domain::BatchOrder, self.epoch as u64));
        let mut sums = [0.0f64; 4];
        let mut steps = 0;
        for (b, chunk) in order.chunks(self.config.batch_size).enumerate() {
            let (cond, real) = data.batch(chunk);
            let (loss_d, g) = self.step(&cond, &real)?;
            for (what, v) in [("discriminator loss", loss_d), ("generator loss", g.total)] {
                if !v.is_finite() {
                    return Err(GanError::NonFiniteLoss {
                        what,
                        epoch: self.epoch,
                        batch: b,
                    });
                }
            }
            for (s, v) in sums.iter_mut().zip([loss_d, g.adv, g.l1, g.total]) {
                *s += v;
            }
            steps += 1;
        }
        let n = steps as f64;
        let stats = EpochStats {
            epoch: self.epoch,
            loss_d: sums[0] / n,
            loss_g_adv: sums[1] / n,
            loss_l1: sums[2] / n,
            loss_g_total: sums[3] / n,
            d_steps: steps,
            g_steps: steps,
        };
        self.epoch += 1;
        self.history.push(stats.clone());
        Ok(stats)
    }

    /// Train until `config.epochs` epochs have completed.
    pub fn run(
        &mut self,
        data: &PairedImages,
        mut on_epoch: impl FnMut(&EpochStats),
    ) -> Result<()> {
        while self.epoch < self.config.epochs {
            let stats = self.train_epoch(data)?;
            on_epoch(&stats);
        }
        Ok(())
    }

    pub fn checkpoint(&mut self) -> Checkpoint {
        Checkpoint::capture(
            &mut self.generator,
            &mut self.discriminator,
            &self.opt_g,
            &self.opt_d,
            &self.config,
            self.epoch,
            RngState::capture(&self.rng),
            &self.history,
        )
    }
}

/// Train from scratch and return the final checkpoint and loss history.
pub fn train(
    data: &PairedImages,
    gcfg: GeneratorConfig,
    dcfg: DiscriminatorConfig,
    cfg: TrainConfig,
    on_epoch: impl FnMut(&EpochStats),
) -> Result<(Checkpoint, Vec<EpochStats>)> {
    if data.is_empty() {
        return Err(GanError::EmptyDataset);
    }
    let mut trainer = Trainer::new(gcfg, dcfg, cfg)?;
    trainer.run(data, on_epoch)?;
    let history = trainer.history().to_vec();
    Ok((trainer.checkpoint(), history))
}
