//! Stand-in corpora with EEG-like and EMG-like spectra.
//!
//! Real EEGdenoiseNet segments are not bundled. These generators shape
//! complex Gaussian spectra and inverse-transform them, so each segment is a
//! random stationary-ish process with a controlled spectral envelope:
//!
//! * EEG: 1/f^β background over 1–45 Hz, an alpha bump at 8.5–11.5 Hz, a
//!   weaker beta bump, and a soft roll-off above 35 Hz.
//! * EMG: log-normal band centred at 45–110 Hz, modulated by a slow random
//!   burst envelope.
//!
//! Segment `i` of a corpus depends only on `(seed, i)`.

use super::Corpus;
use crate::error::Result;
use crate::rng::{stream, Domain};
use crate::signal::{rms, Segment, SegmentKind, SAMPLE_RATE_HZ, SEGMENT_LEN};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

fn shaped_noise(rng: &mut ChaCha8Rng, envelope: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = SEGMENT_LEN;
    let df = SAMPLE_RATE_HZ / n as f64;
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        let amp = envelope(k as f64 * df).max(0.0).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        spectrum[k] = Complex::new(re, im) * amp;
        spectrum[n - k] = spectrum[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    spectrum.iter().map(|c| c.re).collect()
}

fn normalized(mut v: Vec<f64>, target_rms: f64) -> Vec<f64> {
    let r = rms(&v).unwrap_or(0.0);
    if r > 0.0 {
        v.iter_mut().for_each(|s| *s *= target_rms / r);
    }
    v
}

pub fn eeg_segment(seed: u64, index: u64) -> Segment {
    let mut rng = stream(seed, Domain::SyntheticEeg, index);
    let slope = rng.random_range(0.8..1.6);
    let alpha_f = rng.random_range(8.5..11.5);
    let alpha_gain = rng.random_range(0.3..2.0);
    let beta_f = rng.random_range(16.0..24.0);
    let beta_gain = rng.random_range(0.0..0.3);
    let envelope = move |f: f64| {
        if !(1.0..=45.0).contains(&f) {
            return 0.0;
        }
        let background = f.powf(-slope);
        let alpha = alpha_gain * 0.1 * (-(f - alpha_f).powi(2) / (2.0 * 1.2 * 1.2)).exp();
        let beta = beta_gain * 0.05 * (-(f - beta_f).powi(2) / (2.0 * 3.0 * 3.0)).exp();
        let rolloff = if f > 35.0 { (-(f - 35.0) / 5.0).exp() } else { 1.0 };
        (background + alpha + beta) * rolloff
    };
    let amplitude = rng.random_range(5.0..30.0);
    let samples = normalized(shaped_noise(&mut rng, envelope), amplitude);
    Segment::new(samples, SegmentKind::CleanEeg).expect("finite synthetic EEG")
}

pub fn emg_segment(seed: u64, index: u64) -> Segment {
    let mut rng = stream(seed, Domain::SyntheticEmg, index);
    let centre = rng.random_range(45.0..110.0);
    let width = rng.random_range(0.4..0.7);
    let envelope = move |f: f64| {
        if f < 5.0 {
            return 0.0;
        }
        (-(f / centre).ln().powi(2) / (2.0 * width * width)).exp()
    };
    let carrier = shaped_noise(&mut rng, envelope);
    // Slow burst envelope: a floor plus a few Gaussian bumps.
    let bursts: Vec<(f64, f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| {
            (
                rng.random_range(0.0..SEGMENT_LEN as f64),
                rng.random_range(40.0..200.0),
                rng.random_range(0.5..2.5),
            )
        })
        .collect();
    let floor = rng.random_range(0.2..0.6);
    let modulated = carrier
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let t = t as f64;
            let env: f64 = floor
                + bursts
                    .iter()
                    .map(|(mu, sd, a)| a * (-(t - mu).powi(2) / (2.0 * sd * sd)).exp())
                    .sum::<f64>();
            c * env
        })
        .collect();
    let amplitude = rng.random_range(10.0..60.0);
    Segment::new(normalized(modulated, amplitude), SegmentKind::Emg).expect("finite synthetic EMG")
}

pub fn eeg_corpus(count: usize, seed: u64) -> Result<Corpus> {
    let segments = (0..count as u64)
        .into_par_iter()
        .map(|i| eeg_segment(seed, i))
        .collect();
    Corpus::new(segments, SegmentKind::CleanEeg)
}

pub fn emg_corpus(count: usize, seed: u64) -> Result<Corpus> {
    let segments = (0..count as u64)
        .into_par_iter()
        .map(|i| emg_segment(seed, i))
        .collect();
    Corpus::new(segments, SegmentKind::Emg)
}
