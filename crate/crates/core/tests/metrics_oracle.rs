#[path = "support/oracle.rs"]
mod oracle;

use emgscrub_core::dataset::synthetic::{eeg_segment, emg_segment};
use emgscrub_core::metrics::{acc, band_ratios, psd, rrmse_spectral, rrmse_temporal};
use emgscrub_core::rng::{stream, Domain};
use emgscrub_core::signal::rms;
use emgscrub_core::{Segment, SegmentKind};
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn random_pairs(n: usize) -> Vec<(Segment, Segment)> {
    let mut rng = stream(42, Domain::Fixture, 0);
    (0..n as u64)
        .map(|i| {
            let x = eeg_segment(42, i);
            let e = emg_segment(43, i);
            let a = rng.random_range(0.0..2.0);
            let f: Vec<f64> = x
                .samples()
                .iter()
                .zip(e.samples())
                .map(|(x, e)| 0.8 * x + a * e + rng.random_range(-1.0..1.0))
                .collect();
            (Segment::new(f, SegmentKind::Denoised).unwrap(), x)
        })
        .collect()
}

#[test]
fn hundred_pairs_agree_with_reference() {
    for (f, x) in random_pairs(100) {
        let (fs, xs) = (f.samples(), x.samples());
        assert!(close(rms(xs).unwrap(), oracle::rms(xs)));
        assert!(close(acc(fs, xs).unwrap(), oracle::acc(fs, xs)));
        assert!(close(rrmse_temporal(fs, xs).unwrap(), oracle::rrmse_temporal(fs, xs)));
        assert!(close(rrmse_spectral(fs, xs).unwrap(), oracle::rrmse_spectral(fs, xs)));
        let p = psd(&x);
        let reference = oracle::welch(xs);
        let peak = reference.iter().cloned().fold(0.0, f64::max);
        for (a, b) in p.power.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-9 * peak);
        }
        let ours = band_ratios(&p).unwrap().as_array();
        for (a, b) in ours.iter().zip(oracle::band_ratios(xs)) {
            assert!(close(*a, b));
        }
    }
}

#[test]
fn orthogonal_sinusoids_are_uncorrelated() {
    let n = 1024;
    let s: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * 8.0 * i as f64 / n as f64).sin()).collect();
    let c: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * 8.0 * i as f64 / n as f64).cos()).collect();
    assert!(acc(&s, &c).unwrap().abs() < 1e-9);
    assert!(oracle::acc(&s, &c).abs() < 1e-9);
}

#[test]
fn time_shift_hurts_temporal_more_than_spectral() {
    let mut rng = stream(5, Domain::Fixture, 9);
    let noise: Vec<f64> = (0..1024 + 37).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = &noise[..1024];
    let f = &noise[37..];
    let t = rrmse_temporal(f, x).unwrap();
    let s = oracle::rrmse_spectral(f, x);
    assert!(s < t, "spectral {s} temporal {t}");
}
