#![allow(dead_code)]

use emgscrub_core::dataset::synthetic::{eeg_corpus, emg_corpus};
use emgscrub_core::signal::{lambda_for_snr, mix};
use emgscrub_core::Segment;
use emgscrub_gan::train::PairedImages;
use emgscrub_gan::{DiscriminatorConfig, GeneratorConfig, TargetScale, TrainConfig};

/// `(contaminated, clean)` pairs cycling through −7…+2 dB.
pub fn pairs(n: usize, seed: u64) -> Vec<(Segment, Segment)> {
    let eeg = eeg_corpus(n, seed).unwrap();
    let emg = emg_corpus(n, seed + 1).unwrap();
    (0..n)
        .map(|i| {
            let x = &eeg.segments()[i];
            let e = &emg.segments()[i];
            let snr = -7.0 + (i % 10) as f64;
            let lambda = lambda_for_snr(x.samples(), e.samples(), snr).unwrap();
            (mix(x, e, lambda).unwrap(), x.clone())
        })
        .collect()
}

pub fn images(n: usize, seed: u64) -> PairedImages {
    let p = pairs(n, seed);
    PairedImages::from_segments(p.iter().map(|(a, b)| (a, b)), TargetScale::default())
}

pub fn small() -> (GeneratorConfig, DiscriminatorConfig) {
    (
        GeneratorConfig {
            base_channels: 8,
            max_channels: 32,
            n_resnet_blocks: 1,
            ..GeneratorConfig::default()
        },
        DiscriminatorConfig {
            base_channels: 8,
            max_channels: 64,
            ..DiscriminatorConfig::default()
        },
    )
}

pub fn quick(epochs: usize, batch_size: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size,
        seed: 11,
        ..TrainConfig::default()
    }
}
