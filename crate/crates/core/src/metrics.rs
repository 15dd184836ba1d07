//! Denoising quality metrics and the per-SNR evaluation driver.

use crate::dataset::{ContaminatedCorpus, Corpus};
use crate::error::{invalid, Error, Result};
use crate::signal::{rms, Segment, SegmentKind, SAMPLE_RATE_HZ};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Pearson correlation with population moments, clamped to `[-1, 1]`.
pub fn acc(f_y: &[f64], x: &[f64]) -> Result<f64> {
    check_pair(f_y, x)?;
    let n = x.len() as f64;
    let mf = f_y.iter().sum::<f64>() / n;
    let mx = x.iter().sum::<f64>() / n;
    let (mut cov, mut vf, mut vx) = (0.0, 0.0, 0.0);
    for (a, b) in f_y.iter().zip(x) {
        let (da, db) = (a - mf, b - mx);
        cov += da * db;
        vf += da * da;
        vx += db * db;
    }
    if vf == 0.0 {
        return Err(Error::UndefinedCorrelation("denoised signal"));
    }
    if vx == 0.0 {
        return Err(Error::UndefinedCorrelation("reference signal"));
    }
    Ok((cov / (vf * vx).sqrt()).clamp(-1.0, 1.0))
}

/// `rms(f_y − x) / rms(x)`.
pub fn rrmse_temporal(f_y: &[f64], x: &[f64]) -> Result<f64> {
    check_pair(f_y, x)?;
    let reference = rms(x)?;
    if reference == 0.0 {
        return Err(Error::ZeroReference("signal RMS"));
    }
    let diff: Vec<f64> = f_y.iter().zip(x).map(|(a, b)| a - b).collect();
    Ok(rms(&diff)? / reference)
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(invalid("empty signals"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum PsdMethod {
    /// Averaged periodic-Hann periodograms.
    Welch { segment_len: usize, overlap: usize },
    /// Single rectangular-window periodogram over the whole signal.
    Periodogram,
}

impl Default for PsdMethod {
    fn default() -> Self {
        PsdMethod::Welch {
            segment_len: 256,
            overlap: 128,
        }
    }
}

/// One-sided power spectral density, scaled so that `Σ power · Δf` equals
/// the mean square of the input signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub method: PsdMethod,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    /// `Σ power · Δf` over bins with `lo <= f < hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let df = self.bin_width();
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(_, p)| p * df)
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }
}

pub fn psd(seg: &Segment) -> Psd {
    psd_with(seg.samples(), SAMPLE_RATE_HZ, PsdMethod::default()).expect("segment fits default PSD")
}

pub fn psd_with(signal: &[f64], fs: f64, method: PsdMethod) -> Result<Psd> {
    let (nfft, step, window): (usize, usize, Vec<f64>) = match method {
        PsdMethod::Welch {
            segment_len,
            overlap,
        } => {
            if segment_len < 2 || overlap >= segment_len || segment_len > signal.len() {
                return Err(invalid(format!(
                    "Welch segment {segment_len} / overlap {overlap} does not fit {} samples",
                    signal.len()
                )));
            }
            let w = (0..segment_len)
                .map(|i| {
                    0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / segment_len as f64).cos()
                })
                .collect();
            (segment_len, segment_len - overlap, w)
        }
        PsdMethod::Periodogram => {
            if signal.len() < 2 {
                return Err(invalid("periodogram needs at least two samples"));
            }
            (signal.len(), signal.len(), vec![1.0; signal.len()])
        }
    };
    let n_bins = nfft / 2 + 1;
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let mut power = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut n_segments = 0usize;
    let mut start = 0;
    while start + nfft <= signal.len() {
        for (b, (s, w)) in buf.iter_mut().zip(signal[start..start + nfft].iter().zip(&window)) {
            *b = Complex::new(s * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p += buf[k].norm_sqr();
        }
        n_segments += 1;
        start += step;
    }
    let scale = 1.0 / (fs * window_energy * n_segments as f64);
    for (k, p) in power.iter_mut().enumerate() {
        *p *= scale;
        if k != 0 && !(nfft % 2 == 0 && k == nfft / 2) {
            *p *= 2.0;
        }
    }
    let df = fs / nfft as f64;
    let integral: f64 = power.iter().sum::<f64>() * df;
    let mean_square = signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64;
    if integral > 0.0 {
        let k = mean_square / integral;
        power.iter_mut().for_each(|p| *p *= k);
    }
    Ok(Psd {
        freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
        power,
        method,
    })
}

/// Frequency bins entering the spectral RRMSE.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralRange {
    /// Every one-sided bin, 0 Hz to Nyquist.
    #[default]
    Full,
    /// Bins with `1 <= f <= 80` Hz.
    Eeg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub method: PsdMethod,
    pub range: SpectralRange,
}

pub fn rrmse_spectral(f_y: &[f64], x: &[f64]) -> Result<f64> {
    rrmse_spectral_with(f_y, x, SpectralOptions::default())
}

pub fn rrmse_spectral_with(f_y: &[f64], x: &[f64], opts: SpectralOptions) -> Result<f64> {
    check_pair(f_y, x)?;
    let pf = psd_with(f_y, SAMPLE_RATE_HZ, opts.method)?;
    let px = psd_with(x, SAMPLE_RATE_HZ, opts.method)?;
    let keep = |f: f64| match opts.range {
        SpectralRange::Full => true,
        SpectralRange::Eeg => (1.0..=80.0).contains(&f),
    };
    let (diff, reference): (Vec<f64>, Vec<f64>) = px
        .freqs
        .iter()
        .zip(pf.power.iter().zip(&px.power))
        .filter(|(f, _)| keep(**f))
        .map(|(_, (a, b))| (a - b, *b))
        .unzip();
    let denom = rms(&reference)?;
    if denom == 0.0 {
        return Err(Error::ZeroReference("power spectral density"));
    }
    Ok(rms(&diff)? / denom)
}

/// Half-open EEG bands, lower edge inclusive.
pub const BANDS: [(&str, f64, f64); 5] = [
    ("delta", 1.0, 4.0),
    ("theta", 4.0, 8.0),
    ("alpha", 8.0, 13.0),
    ("beta", 13.0, 30.0),
    ("gamma", 30.0, 80.0),
];

/// Fraction of 1–80 Hz power in each EEG band.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BandPowers {
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BandPowers {
    pub fn as_array(&self) -> [f64; 5] {
        [self.delta, self.theta, self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        BandPowers {
            delta: v[0],
            theta: v[1],
            alpha: v[2],
            beta: v[3],
            gamma: v[4],
        }
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Element-wise mean of several band tables.
    pub fn mean(items: &[BandPowers]) -> Option<BandPowers> {
        if items.is_empty() {
            return None;
        }
        let mut acc = [0.0; 5];
        for b in items {
            for (a, v) in acc.iter_mut().zip(b.as_array()) {
                *a += v;
            }
        }
        Some(BandPowers::from_array(acc.map(|a| a / items.len() as f64)))
    }
}

pub fn band_ratios(p: &Psd) -> Result<BandPowers> {
    let powers = BANDS.map(|(_, lo, hi)| p.band_power(lo, hi));
    let total: f64 = powers.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroReference("1-80 Hz band power"));
    }
    Ok(BandPowers::from_array(powers.map(|v| v / total)))
}

/// Table-2 style band layout: a header row and one row per labelled entry,
/// ratios printed to four decimals.
pub fn band_table_csv(rows: &[(&str, BandPowers)]) -> String {
    let mut out = String::from("signal");
    for (name, _, _) in BANDS {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (label, b) in rows {
        out.push_str(label);
        for v in b.as_array() {
            let _ = write!(out, ",{v:.4}");
        }
        out.push('\n');
    }
    out
}

/// Anything that maps a contaminated segment to an estimate of the clean one.
pub trait Denoiser: Sync {
    fn name(&self) -> &str;

    fn denoise(&self, contaminated: &Segment) -> Result<Segment>;

    fn denoise_batch(&self, batch: &[Segment]) -> Result<Vec<Segment>> {
        batch.iter().map(|s| self.denoise(s)).collect()
    }
}

/// Returns its input unchanged; the "no denoising" baseline.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityDenoiser;

impl Denoiser for IdentityDenoiser {
    fn name(&self) -> &str {
        "identity"
    }

    fn denoise(&self, contaminated: &Segment) -> Result<Segment> {
        Ok(contaminated.clone().with_kind(SegmentKind::Denoised))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub snr_db: i32,
    pub segment_id: usize,
    pub acc: f64,
    pub rrmse_temporal: f64,
    pub rrmse_spectral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub snr_level: i32,
    pub acc: f64,
    pub rrmse_temporal: f64,
    pub rrmse_spectral: f64,
    pub n_segments: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub denoiser: String,
    pub rows: Vec<MetricsRow>,
    pub details: Vec<SegmentMetrics>,
    /// Means over all levels (mean of per-level means).
    pub overall: MetricsRow,
}

const EVAL_CHUNK: usize = 64;

pub fn segment_metrics(denoised: &Segment, clean: &Segment, opts: SpectralOptions) -> Result<[f64; 3]> {
    Ok([
        acc(denoised.samples(), clean.samples())?,
        rrmse_temporal(denoised.samples(), clean.samples())?,
        rrmse_spectral_with(denoised.samples(), clean.samples(), opts)?,
    ])
}

pub fn evaluate(
    denoiser: &dyn Denoiser,
    test: &ContaminatedCorpus,
    clean_ref: &Corpus,
) -> Result<Evaluation> {
    evaluate_with(denoiser, test, clean_ref, SpectralOptions::default())
}

pub fn evaluate_with(
    denoiser: &dyn Denoiser,
    test: &ContaminatedCorpus,
    clean_ref: &Corpus,
    opts: SpectralOptions,
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(invalid("empty test corpus"));
    }
    for (k, r) in test.records.iter().enumerate() {
        if r.clean_index >= clean_ref.len() {
            return Err(Error::at(
                k,
                invalid(format!(
                    "clean index {} outside reference corpus of {}",
                    r.clean_index,
                    clean_ref.len()
                )),
            ));
        }
    }
    let mut details = Vec::with_capacity(test.len());
    for (chunk_no, chunk) in test.records.chunks(EVAL_CHUNK).enumerate() {
        let inputs: Vec<Segment> = chunk.iter().map(|r| r.contaminated.clone()).collect();
        let outputs = denoiser.denoise_batch(&inputs)?;
        if outputs.len() != inputs.len() {
            return Err(invalid(format!(
                "denoiser returned {} segments for {}",
                outputs.len(),
                inputs.len()
            )));
        }
        let scored = chunk
            .par_iter()
            .zip(outputs.par_iter())
            .enumerate()
            .map(|(j, (r, out))| {
                let clean = &clean_ref.segments()[r.clean_index];
                let [a, t, s] = segment_metrics(out, clean, opts)
                    .map_err(|e| Error::at(chunk_no * EVAL_CHUNK + j, e))?;
                Ok(SegmentMetrics {
                    snr_db: r.target_snr_db.round() as i32,
                    segment_id: r.clean_index,
                    acc: a,
                    rrmse_temporal: t,
                    rrmse_spectral: s,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        details.extend(scored);
    }
    let rows: Vec<MetricsRow> = test
        .snr_levels
        .iter()
        .map(|&level| {
            let at: Vec<&SegmentMetrics> = details.iter().filter(|d| d.snr_db == level).collect();
            let n = at.len().max(1) as f64;
            MetricsRow {
                snr_level: level,
                acc: at.iter().map(|d| d.acc).sum::<f64>() / n,
                rrmse_temporal: at.iter().map(|d| d.rrmse_temporal).sum::<f64>() / n,
                rrmse_spectral: at.iter().map(|d| d.rrmse_spectral).sum::<f64>() / n,
                n_segments: at.len(),
            }
        })
        .collect();
    let n = rows.len() as f64;
    let overall = MetricsRow {
        snr_level: 0,
        acc: rows.iter().map(|r| r.acc).sum::<f64>() / n,
        rrmse_temporal: rows.iter().map(|r| r.rrmse_temporal).sum::<f64>() / n,
        rrmse_spectral: rows.iter().map(|r| r.rrmse_spectral).sum::<f64>() / n,
        n_segments: details.len(),
    };
    Ok(Evaluation {
        denoiser: denoiser.name().to_owned(),
        rows,
        details,
        overall,
    })
}

impl Evaluation {
    /// `snr_db,segment_id,acc,rrmse_t,rrmse_s`
    pub fn details_csv(&self) -> String {
        let mut out = String::from("snr_db,segment_id,acc,rrmse_t,rrmse_s\n");
        for d in &self.details {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                d.snr_db, d.segment_id, d.acc, d.rrmse_temporal, d.rrmse_spectral
            );
        }
        out
    }

    /// `snr_db,n_segments,acc,rrmse_t,rrmse_s`
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("snr_db,n_segments,acc,rrmse_t,rrmse_s\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.snr_level, r.n_segments, r.acc, r.rrmse_temporal, r.rrmse_spectral
            );
        }
        out
    }

    /// Global averages laid out like a model-comparison table.
    pub fn averages_csv(&self) -> String {
        format!(
            "model,CC,RRMSE_temporal,RRMSE_spectral\n{},{:.4},{:.4},{:.4}\n",
            self.denoiser, self.overall.acc, self.overall.rrmse_temporal, self.overall.rrmse_spectral
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SEGMENT_LEN;
    use approx::assert_abs_diff_eq;

    fn tone(freq: f64, phase: f64) -> Vec<f64> {
        (0..SEGMENT_LEN)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / SAMPLE_RATE_HZ + phase).sin())
            .collect()
    }

    fn seg(v: Vec<f64>) -> Segment {
        Segment::new(v, SegmentKind::CleanEeg).unwrap()
    }

    #[test]
    fn acc_examples() {
        let x = tone(3.0, 0.2);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(acc(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(acc(&neg, &x).unwrap(), -1.0, epsilon = 1e-15);
        // 1024 samples at 512 Hz = 2 s, so 4 Hz spans 8 whole periods.
        let s = tone(4.0, 0.0);
        let c = tone(4.0, std::f64::consts::FRAC_PI_2);
        assert!(acc(&s, &c).unwrap().abs() < 1e-9);
        assert!(matches!(
            acc(&[1.0; 8], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn rrmse_temporal_examples() {
        let x = tone(7.0, 0.3);
        let zero = vec![0.0; SEGMENT_LEN];
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert_eq!(rrmse_temporal(&x, &x).unwrap(), 0.0);
        assert_abs_diff_eq!(rrmse_temporal(&zero, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rrmse_temporal(&twice, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            rrmse_temporal(&x, &zero),
            Err(Error::ZeroReference(_))
        ));
    }

    #[test]
    fn psd_layout_and_parseval() {
        let x = tone(16.0, 0.0);
        let p = psd(&seg(x.clone()));
        assert_eq!(p.freqs.len(), 129);
        assert_eq!(p.freqs[128], 256.0);
        let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((p.total_power() - ms).abs() <= 1e-6 * ms);

        let z = psd(&Segment::zeros(SegmentKind::CleanEeg));
        assert!(z.power.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sixteen_hz_tone_concentrates_power() {
        let x = tone(16.0, 0.4);
        let welch = psd(&seg(x.clone()));
        let peak = welch
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(welch.freqs[peak], 16.0);
        // A bin-centred tone under a Hann window keeps 2/3 of its power in
        // the centre bin and 1/6 in each neighbour.
        let share = welch.power[peak] / welch.power.iter().sum::<f64>();
        assert_abs_diff_eq!(share, 2.0 / 3.0, epsilon = 1e-9);
        let lobe: f64 = welch.power[peak - 1..=peak + 1].iter().sum::<f64>()
            / welch.power.iter().sum::<f64>();
        assert!(lobe > 0.95);

        let plain = psd_with(&x, SAMPLE_RATE_HZ, PsdMethod::Periodogram).unwrap();
        let k = plain.freqs.iter().position(|&f| f == 16.0).unwrap();
        assert!(plain.power[k] / plain.power.iter().sum::<f64>() > 0.95);
    }

    #[test]
    fn rrmse_spectral_examples() {
        let x = tone(9.0, 0.0);
        let zero = vec![0.0; SEGMENT_LEN];
        assert_eq!(rrmse_spectral(&x, &x).unwrap(), 0.0);
        assert_abs_diff_eq!(rrmse_spectral(&zero, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert!(rrmse_spectral(&x, &zero).is_err());
        let opts = SpectralOptions {
            range: SpectralRange::Eeg,
            ..Default::default()
        };
        assert_eq!(rrmse_spectral_with(&x, &x, opts).unwrap(), 0.0);
    }

    #[test]
    fn ten_hz_tone_is_alpha() {
        let b = band_ratios(&psd(&seg(tone(10.0, 0.1)))).unwrap();
        assert!(b.alpha > 0.95, "{b:?}");
        assert_abs_diff_eq!(b.sum(), 1.0, epsilon = 1e-9);
        assert!(band_ratios(&psd(&Segment::zeros(SegmentKind::CleanEeg))).is_err());
    }

    #[test]
    fn band_table_layout() {
        let truth = BandPowers::from_array([0.2991, 0.1767, 0.3630, 0.1294, 0.0620]);
        let csv = band_table_csv(&[("ground truth", truth)]);
        assert_eq!(
            csv,
            "signal,delta,theta,alpha,beta,gamma\nground truth,0.2991,0.1767,0.3630,0.1294,0.0620\n"
        );
    }
}
