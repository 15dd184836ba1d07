//! Straight-from-the-formula reference implementations: naive sums and a
//! direct O(N²) DFT, no shared code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const FS: f64 = 512.0;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn rms(v: &[f64]) -> f64 {
    mean(&v.iter().map(|a| a * a).collect::<Vec<_>>()).sqrt()
}

pub fn acc(f: &[f64], x: &[f64]) -> f64 {
    let (mf, mx) = (mean(f), mean(x));
    let n = f.len() as f64;
    let cov = f.iter().zip(x).map(|(a, b)| (a - mf) * (b - mx)).sum::<f64>() / n;
    let vf = f.iter().map(|a| (a - mf).powi(2)).sum::<f64>() / n;
    let vx = x.iter().map(|b| (b - mx).powi(2)).sum::<f64>() / n;
    cov / (vf * vx).sqrt()
}

pub fn rrmse_temporal(f: &[f64], x: &[f64]) -> f64 {
    let d: Vec<f64> = f.iter().zip(x).map(|(a, b)| a - b).collect();
    rms(&d) / rms(x)
}

/// Welch, 256-point periodic Hann, hop 128, one-sided density, rescaled so
/// that Σ P·Δf equals the mean square.
pub fn welch(x: &[f64]) -> Vec<f64> {
    const L: usize = 256;
    let w: Vec<f64> = (0..L).map(|n| (PI * n as f64 / L as f64).sin().powi(2)).collect();
    let u: f64 = w.iter().map(|v| v * v).sum();
    let mut p = vec![0.0; L / 2 + 1];
    let mut segments = 0.0;
    let mut start = 0;
    while start + L <= x.len() {
        for (k, pk) in p.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..L {
                let ang = -2.0 * PI * (k * n) as f64 / L as f64;
                let v = x[start + n] * w[n];
                re += v * ang.cos();
                im += v * ang.sin();
            }
            let one_sided = if k == 0 || k == L / 2 { 1.0 } else { 2.0 };
            *pk += one_sided * (re * re + im * im) / (FS * u);
        }
        segments += 1.0;
        start += L / 2;
    }
    let df = FS / L as f64;
    p.iter_mut().for_each(|v| *v /= segments);
    let integral: f64 = p.iter().sum::<f64>() * df;
    let ms = mean(&x.iter().map(|a| a * a).collect::<Vec<_>>());
    if integral > 0.0 {
        p.iter_mut().for_each(|v| *v *= ms / integral);
    }
    p
}

pub fn rrmse_spectral(f: &[f64], x: &[f64]) -> f64 {
    let (pf, px) = (welch(f), welch(x));
    let d: Vec<f64> = pf.iter().zip(&px).map(|(a, b)| a - b).collect();
    rms(&d) / rms(&px)
}

pub fn band_ratios(x: &[f64]) -> [f64; 5] {
    let p = welch(x);
    let df = FS / 256.0;
    let edges = [1.0, 4.0, 8.0, 13.0, 30.0, 80.0];
    let mut bands = [0.0; 5];
    for (k, v) in p.iter().enumerate() {
        let f = k as f64 * df;
        for b in 0..5 {
            if f >= edges[b] && f < edges[b + 1] {
                bands[b] += v * df;
            }
        }
    }
    let total: f64 = bands.iter().sum();
    bands.map(|b| b / total)
}
