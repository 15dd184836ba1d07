//! Numeric primitives shared by every stage: RMS amplitude, the RMS-ratio
//! SNR in decibels, solving the noise gain for a target SNR, and linear
//! mixing of clean EEG with scaled EMG.
//!
//! The SNR convention is `10 · log10(rms(x) / rms(λ·n))`, i.e. the RMS ratio
//! (not the power ratio) under a factor of ten.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

/// Samples per segment.
pub const SEGMENT_LEN: usize = 1024;
/// Sampling rate of every segment.
pub const SAMPLE_RATE_HZ: f64 = 512.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    CleanEeg,
    Emg,
    Contaminated,
    Denoised,
}

/// A 1024-sample, 512 Hz single-channel segment with finite samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    samples: Vec<f64>,
    kind: SegmentKind,
}

impl Segment {
    pub fn new(samples: Vec<f64>, kind: SegmentKind) -> Result<Self> {
        if samples.len() != SEGMENT_LEN {
            return Err(Error::InvalidData(format!(
                "segment has {} samples, expected {SEGMENT_LEN}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Segment { samples, kind })
    }

    pub fn zeros(kind: SegmentKind) -> Self {
        Segment {
            samples: vec![0.0; SEGMENT_LEN],
            kind,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        SAMPLE_RATE_HZ
    }

    pub fn with_kind(mut self, kind: SegmentKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Element-wise `c · s`, same kind.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Segment::new(self.samples.iter().map(|v| c * v).collect(), self.kind)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

impl AsRef<[f64]> for Segment {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

/// One contaminated segment together with how it was made.
#[derive(Clone, Debug, PartialEq)]
pub struct MixRecord {
    pub clean_index: usize,
    pub emg_index: usize,
    pub target_snr_db: f64,
    pub lambda: f64,
    pub contaminated: Segment,
}

/// Root mean square, `sqrt(Σ s² / N)`.
pub fn rms(s: &[f64]) -> Result<f64> {
    if s.is_empty() {
        return Err(invalid("rms of an empty sequence"));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(invalid("rms of a sequence with non-finite values"));
    }
    let sum_sq: f64 = s.iter().map(|v| v * v).sum();
    Ok((sum_sq / s.len() as f64).sqrt())
}

/// SNR in dB between a clean signal and an already-scaled noise signal.
pub fn measure_snr_db(clean: &[f64], scaled_noise: &[f64]) -> Result<f64> {
    if clean.len() != scaled_noise.len() {
        return Err(invalid(format!(
            "length mismatch: clean {} vs noise {}",
            clean.len(),
            scaled_noise.len()
        )));
    }
    let noise_rms = rms(scaled_noise)?;
    if noise_rms == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    Ok(10.0 * (rms(clean)? / noise_rms).log10())
}

/// Noise gain `λ` such that `measure_snr_db(clean, λ·noise) == target_snr_db`.
pub fn lambda_for_snr(clean: &[f64], noise: &[f64], target_snr_db: f64) -> Result<f64> {
    if !target_snr_db.is_finite() {
        return Err(invalid("target SNR must be finite"));
    }
    let clean_rms = rms(clean)?;
    let noise_rms = rms(noise)?;
    if clean_rms == 0.0 {
        return Err(invalid("clean signal has zero RMS"));
    }
    if noise_rms == 0.0 {
        return Err(invalid("noise signal has zero RMS"));
    }
    let lambda = clean_rms / (noise_rms * 10f64.powf(target_snr_db / 10.0));
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!(
            "target {target_snr_db} dB gives a degenerate gain {lambda}"
        )));
    }
    Ok(lambda)
}

/// `y_i = x_i + λ · n_i`.
pub fn mix_samples(clean: &[f64], noise: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if clean.len() != noise.len() {
        return Err(invalid(format!(
            "length mismatch: clean {} vs noise {}",
            clean.len(),
            noise.len()
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("mixing gain must be finite and >= 0, got {lambda}")));
    }
    Ok(clean
        .iter()
        .zip(noise)
        .map(|(x, n)| x + lambda * n)
        .collect())
}

pub fn mix(clean: &Segment, noise: &Segment, lambda: f64) -> Result<Segment> {
    Segment::new(
        mix_samples(clean.samples(), noise.samples(), lambda)?,
        SegmentKind::Contaminated,
    )
}
