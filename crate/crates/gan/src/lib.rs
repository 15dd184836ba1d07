//! Conditional GAN that maps contaminated EEG segment images to clean ones.
//!
//! The network code is self-contained: [`tensor`] provides GEMM-backed
//! convolution primitives, [`layers`] the differentiable building blocks and
//! [`model`] the two architectures. [`train`] runs the adversarial training
//! loop, [`checkpoint`] persists it, and [`denoise`] wraps a trained
//! generator as an end-to-end segment denoiser.

pub mod checkpoint;
pub mod denoise;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod model;
pub mod optim;
pub mod tensor;
pub mod train;

pub use checkpoint::Checkpoint;
pub use denoise::GanDenoiser;
pub use model::{Discriminator, DiscriminatorConfig, DiscriminatorHead, Generator, GeneratorConfig};
pub use train::{EpochStats, TargetScale, TrainConfig, Trainer};

pub type Result<T, E = GanError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum GanError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty training set")]
    EmptyDataset,

    #[error("non-finite {what} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        what: &'static str,
        epoch: usize,
        batch: usize,
    },

    /// The checkpoint does not describe the architecture it claims.
    #[error("checkpoint incompatible: {0}")]
    Incompatible(String),

    #[error("checkpoint I/O on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Data(#[from] emgscrub_core::Error),
}
