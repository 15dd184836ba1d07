//! Building blocks for removing myogenic (EMG) artifacts from single-channel
//! EEG segments with an image-to-image model.
//!
//! * [`signal`]: segments, RMS, SNR and mixing
//! * [`dataset`]: corpus I/O, expansion, splits and contaminated corpora
//! * [`codec`]: 1024-sample segment ⇄ 32×32 image
//! * [`metrics`]: correlation, temporal/spectral RRMSE, PSD and band ratios

pub mod codec;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use signal::{Segment, SegmentKind, SAMPLE_RATE_HZ, SEGMENT_LEN};
