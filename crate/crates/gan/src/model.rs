//! Generator and discriminator architectures.
//!
//! Generator (ResNet style, all convolutions bias-free before batch norm):
//!
//! ```text
//! conv7 1→b, BN, ReLU
//! conv3/2 b→2b, BN, ReLU          32 → 16
//! conv3/2 2b→4b, BN, ReLU         16 → 8
//! n × [conv3, BN, ReLU, dropout, conv3, BN] + skip
//! convT3/2 4b→2b, BN, ReLU        8 → 16
//! convT3/2 2b→b, BN, ReLU         16 → 32
//! conv7 b→1 (+bias), Tanh
//! ```
//!
//! Discriminator: the condition and the candidate image are stacked as two
//! channels and pass through four convolutions (b, 2b, 4b, 8b channels;
//! strides 2, 2, 2, 1) with LeakyReLU(0.2), batch norm on all but the first.
//! A fully connected layer plus Sigmoid produces one probability per sample;
//! the patch head replaces it with a 3×3 convolution scoring every location.

use crate::layers::{
    Activation, ActivationLayer, BatchNorm2d, Conv2d, ConvTranspose2d, Dropout, Layer, Linear,
    Pass, Role, Sequential, Visitor,
};
use crate::tensor::{Scalar, Tensor};
use crate::{GanError, Result};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub in_channels: usize,
    pub base_channels: usize,
    pub max_channels: usize,
    pub n_resnet_blocks: usize,
    /// Dropout inside each residual block at train time.
    pub dropout: f64,
    pub image_side: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            in_channels: 1,
            base_channels: 64,
            max_channels: 256,
            n_resnet_blocks: 6,
            dropout: 0.5,
            image_side: 32,
        }
    }
}

impl GeneratorConfig {
    /// Channel widths of the stem and the two downsampling stages.
    pub fn widths(&self) -> [usize; 3] {
        let b = self.base_channels;
        [b, (2 * b).min(self.max_channels), (4 * b).min(self.max_channels)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.base_channels == 0 || self.max_channels < self.base_channels {
            return Err(GanError::Config(format!("bad generator widths: {self:?}")));
        }
        if self.image_side < 4 || self.image_side % 4 != 0 {
            return Err(GanError::Config(format!(
                "generator image side {} must be a multiple of 4",
                self.image_side
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(GanError::Config(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorHead {
    /// Fully connected layer + Sigmoid: one probability per sample.
    #[default]
    Scalar,
    /// 3×3 convolution + Sigmoid: one probability per spatial location.
    Patch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorConfig {
    pub in_channels: usize,
    pub base_channels: usize,
    pub max_channels: usize,
    pub leaky_slope: f64,
    pub head: DiscriminatorHead,
    pub image_side: usize,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        DiscriminatorConfig {
            in_channels: 2,
            base_channels: 64,
            max_channels: 512,
            leaky_slope: 0.2,
            head: DiscriminatorHead::Scalar,
            image_side: 32,
        }
    }
}

impl DiscriminatorConfig {
    pub const CONV_LAYERS: usize = 4;

    pub fn widths(&self) -> [usize; 4] {
        let b = self.base_channels;
        [b, 2 * b, 4 * b, 8 * b].map(|c| c.min(self.max_channels))
    }

    /// Side length of the final feature map.
    pub fn feature_side(&self) -> usize {
        self.image_side / 8
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.base_channels == 0 {
            return Err(GanError::Config(format!("bad discriminator widths: {self:?}")));
        }
        if self.image_side < 8 || self.image_side % 8 != 0 {
            return Err(GanError::Config(format!(
                "discriminator image side {} must be a multiple of 8",
                self.image_side
            )));
        }
        Ok(())
    }
}

fn act<T: Scalar>(kind: Activation) -> Layer<T> {
    Layer::Act(ActivationLayer::new(kind))
}

fn norm<T: Scalar>(ch: usize, rng: &mut ChaCha8Rng) -> Layer<T> {
    Layer::Norm(BatchNorm2d::new(ch, rng))
}

#[derive(Clone, Debug)]
pub struct Generator<T> {
    pub config: GeneratorConfig,
    net: Sequential<T>,
}

impl<T: Scalar> Generator<T> {
    pub fn new(config: GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let [c0, c1, c2] = config.widths();
        let relu = || act(Activation::Relu);
        let mut layers = vec![
            Layer::Conv(Conv2d::new(config.in_channels, c0, 7, 1, 3, false, rng)),
            norm(c0, rng),
            relu(),
            Layer::Conv(Conv2d::new(c0, c1, 3, 2, 1, false, rng)),
            norm(c1, rng),
            relu(),
            Layer::Conv(Conv2d::new(c1, c2, 3, 2, 1, false, rng)),
            norm(c2, rng),
            relu(),
        ];
        for _ in 0..config.n_resnet_blocks {
            layers.push(Layer::Residual(Box::new(Sequential::new(vec![
                Layer::Conv(Conv2d::new(c2, c2, 3, 1, 1, false, rng)),
                norm(c2, rng),
                relu(),
                Layer::Dropout(Dropout::new(config.dropout)),
                Layer::Conv(Conv2d::new(c2, c2, 3, 1, 1, false, rng)),
                norm(c2, rng),
            ]))));
        }
        layers.extend([
            Layer::ConvT(ConvTranspose2d::new(c2, c1, 3, 2, 1, 1, false, rng)),
            norm(c1, rng),
            relu(),
            Layer::ConvT(ConvTranspose2d::new(c1, c0, 3, 2, 1, 1, false, rng)),
            norm(c0, rng),
            relu(),
            Layer::Conv(Conv2d::new(c0, config.in_channels, 7, 1, 3, true, rng)),
            act(Activation::Tanh),
        ]);
        Ok(Generator {
            config,
            net: Sequential::new(layers),
        })
    }

    fn check(&self, x: &Tensor<T>) -> Result<()> {
        let s = self.config.image_side;
        let expected = [self.config.in_channels, x.batch(), s, s];
        if x.shape != expected || x.batch() == 0 {
            return Err(GanError::Shape(format!(
                "generator expects {expected:?}, got {:?}",
                x.shape
            )));
        }
        Ok(())
    }

    /// Training-time forward; caches activations for [`Generator::backward`].
    pub fn forward(&mut self, x: &Tensor<T>, pass: &mut Pass<'_>) -> Result<Tensor<T>> {
        self.check(x)?;
        Ok(self.net.forward(x, pass))
    }

    /// Evaluation forward: running statistics, dropout off, no caching.
    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(x)?;
        Ok(self.net.infer(x))
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        self.net.backward(dy)
    }

    pub fn visit(&mut self, f: &mut Visitor<'_, T>) {
        self.net.visit("generator", f);
    }

    pub fn zero_grad(&mut self) {
        self.visit(&mut |_, p, _| p.zero_grad());
    }

    pub fn trainable_count(&mut self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, p, role| {
            if role == Role::Trainable {
                n += p.len()
            }
        });
        n
    }
}

#[derive(Clone, Debug)]
pub struct Discriminator<T> {
    pub config: DiscriminatorConfig,
    net: Sequential<T>,
}

impl<T: Scalar> Discriminator<T> {
    pub fn new(config: DiscriminatorConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let [c0, c1, c2, c3] = config.widths();
        let leaky = || act(Activation::LeakyRelu(config.leaky_slope));
        let mut layers = vec![
            Layer::Conv(Conv2d::new(config.in_channels, c0, 4, 2, 1, true, rng)),
            leaky(),
            Layer::Conv(Conv2d::new(c0, c1, 4, 2, 1, false, rng)),
            norm(c1, rng),
            leaky(),
            Layer::Conv(Conv2d::new(c1, c2, 4, 2, 1, false, rng)),
            norm(c2, rng),
            leaky(),
            Layer::Conv(Conv2d::new(c2, c3, 3, 1, 1, false, rng)),
            norm(c3, rng),
            leaky(),
        ];
        let side = config.feature_side();
        match config.head {
            DiscriminatorHead::Scalar => layers.push(Layer::Linear(Linear::new(c3 * side * side, 1, rng))),
            DiscriminatorHead::Patch => layers.push(Layer::Conv(Conv2d::new(c3, 1, 3, 1, 1, true, rng))),
        }
        layers.push(act(Activation::Sigmoid));
        Ok(Discriminator {
            config,
            net: Sequential::new(layers),
        })
    }

    fn stack(&self, cond: &Tensor<T>, candidate: &Tensor<T>) -> Result<Tensor<T>> {
        let s = self.config.image_side;
        let half = self.config.in_channels / 2;
        for t in [cond, candidate] {
            if t.shape != [half, cond.batch(), s, s] || t.batch() == 0 {
                return Err(GanError::Shape(format!(
                    "discriminator expects [{half}, N, {s}, {s}] inputs, got {:?} and {:?}",
                    cond.shape, candidate.shape
                )));
            }
        }
        Ok(Tensor::concat_channels(cond, candidate))
    }

    /// Probabilities, shape `[1, N, 1, 1]` (scalar head) or `[1, N, s/8, s/8]`.
    pub fn forward(
        &mut self,
        cond: &Tensor<T>,
        candidate: &Tensor<T>,
        pass: &mut Pass<'_>,
    ) -> Result<Tensor<T>> {
        let x = self.stack(cond, candidate)?;
        Ok(self.net.forward(&x, pass))
    }

    pub fn infer(&self, cond: &Tensor<T>, candidate: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self.stack(cond, candidate)?;
        Ok(self.net.infer(&x))
    }

    /// Returns the gradient with respect to the candidate image.
    pub fn backward(&mut self, dprob: &Tensor<T>) -> Tensor<T> {
        let dx = self.net.backward(dprob);
        dx.split_channels(self.config.in_channels / 2).1
    }

    pub fn visit(&mut self, f: &mut Visitor<'_, T>) {
        self.net.visit("discriminator", f);
    }

    pub fn zero_grad(&mut self) {
        self.visit(&mut |_, p, _| p.zero_grad());
    }

    pub fn trainable_count(&mut self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, p, role| {
            if role == Role::Trainable {
                n += p.len()
            }
        });
        n
    }
}
