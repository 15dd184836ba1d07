//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use emgscrub_cli::commands::{AVERAGES_FILE, BANDS_FILE, CHECKPOINT_FILE, DETAIL_FILE, LOSSES_FILE, SUMMARY_FILE};
use emgscrub_cli::manifest::RunManifest;
use emgscrub_core::codec::{decode, encode, export_png, import_png};
use emgscrub_core::dataset::synthetic::{eeg_segment, emg_segment};
use emgscrub_core::metrics::{acc, band_ratios, psd, rrmse_spectral, rrmse_temporal};
use emgscrub_core::rng::{stream, Domain};
use emgscrub_core::signal::{lambda_for_snr, measure_snr_db, rms};
use emgscrub_core::{Segment, SegmentKind, SEGMENT_LEN};
use emgscrub_gan::gradcheck::{check_discriminator, check_generator, GradCheckConfig};
use rand::Rng;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

const BIN: &str = env!("CARGO_BIN_EXE_emgscrub");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

fn results(dir: &Path) -> Result<Value, String> {
    RunManifest::read(dir).map(|m| m.results).map_err(|e| e.to_string())
}

fn number(v: &Value, path: &[&str]) -> Result<f64, String> {
    let mut cur = v;
    for k in path {
        cur = &cur[*k];
    }
    cur.as_f64().ok_or_else(|| format!("missing number at {path:?}"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn metrics_oracle() -> Outcome {
    let mut rng = stream(42, Domain::Fixture, 0);
    let mut checked = 0;
    for i in 0..100u64 {
        let x = eeg_segment(42, i);
        let e = emg_segment(43, i);
        let a = rng.random_range(0.0..2.0);
        let f: Vec<f64> = x
            .samples()
            .iter()
            .zip(e.samples())
            .map(|(x, e)| 0.8 * x + a * e + rng.random_range(-1.0..1.0))
            .collect();
        let xs = x.samples();
        let ours = [
            rms(xs).unwrap(),
            acc(&f, xs).unwrap(),
            rrmse_temporal(&f, xs).unwrap(),
            rrmse_spectral(&f, xs).unwrap(),
        ];
        let reference = [
            oracle::rms(xs),
            oracle::acc(&f, xs),
            oracle::rrmse_temporal(&f, xs),
            oracle::rrmse_spectral(&f, xs),
        ];
        for (name, (a, b)) in ["rms", "acc", "rrmse_t", "rrmse_s"].iter().zip(ours.iter().zip(reference)) {
            ensure(close(*a, b), || format!("pair {i}: {name} {a} vs {b}"))?;
        }
        let bands = band_ratios(&psd(&x)).unwrap().as_array();
        for (a, b) in bands.iter().zip(oracle::band_ratios(xs)) {
            ensure(close(*a, b), || format!("pair {i}: band ratio {a} vs {b}"))?;
        }
        checked += 1;
    }
    Ok(format!("{checked} pairs within 1e-9"))
}

fn snr_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let x = eeg_segment(5, i);
        let n = emg_segment(6, i);
        for level in -7..=2 {
            let l = lambda_for_snr(x.samples(), n.samples(), level as f64).map_err(|e| e.to_string())?;
            let scaled: Vec<f64> = n.samples().iter().map(|v| l * v).collect();
            let got = measure_snr_db(x.samples(), &scaled).map_err(|e| e.to_string())?;
            worst = worst.max((got - level as f64).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("worst deviation {worst:e} dB"))?;
    Ok(format!("10000 mixtures, worst deviation {worst:.2e} dB"))
}

fn codec_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let png = tmp.path().join("seg.png");
    let mut rng = stream(9, Domain::Fixture, 1);
    let (mut float_worst, mut png_worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let gain = 10f64.powf(rng.random_range(-3.0..3.0));
        let offset = rng.random_range(-100.0..100.0);
        let v: Vec<f64> = (0..SEGMENT_LEN).map(|_| offset + gain * rng.random_range(-1.0..1.0)).collect();
        let seg = Segment::new(v, SegmentKind::CleanEeg).unwrap();
        let (img, scale) = encode(&seg);
        let range = scale.range();
        let err = |back: &Segment| {
            back.samples()
                .iter()
                .zip(seg.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / range
        };
        float_worst = float_worst.max(err(&decode(&img, scale)));
        export_png(&img, &png).map_err(|e| e.to_string())?;
        let back = import_png(&png).map_err(|e| e.to_string())?;
        png_worst = png_worst.max(err(&decode(&back, scale)));
    }
    ensure(float_worst <= 1e-6, || format!("float path {float_worst:e} of range"))?;
    ensure(png_worst <= 1.0 / 255.0, || format!("png path {png_worst:e} of range"))?;
    Ok(format!("float {float_worst:.1e}, png {png_worst:.2e} of range"))
}

fn gradient_check() -> Outcome {
    let cfg = GradCheckConfig::default();
    let mut lines = Vec::new();
    for (name, report) in [("generator", check_generator(&cfg)), ("discriminator", check_discriminator(&cfg))] {
        let r = report.map_err(|e| e.to_string())?;
        ensure(r.checked >= 200 && r.pass_rate() >= 0.95, || format!("{name}: {r:?}"))?;
        lines.push(format!("{name} {}/{} (worst {:.1e})", r.passed, r.checked, r.worst));
    }
    Ok(lines.join(", "))
}

/// Artifacts of one desk-scale run: fixtures, synth, train, two evaluations.
struct Desk {
    root: PathBuf,
    l1: Vec<f64>,
    model: Value,
    baseline: Value,
}

const METRIC_FILES: [&str; 4] = [DETAIL_FILE, SUMMARY_FILE, AVERAGES_FILE, BANDS_FILE];

fn desk_pipeline(root: &Path) -> Result<Desk, String> {
    let run = |args: &[&str]| cli(root, args);
    run(&["fixtures", "--out", "fx", "--eeg-count", "560", "--emg-count", "610", "--seed", "1"])?;
    run(&[
        "synth", "--eeg", "fx/eeg.f64", "--emg", "fx/emg.f64", "--out", "syn", "--expand", "610", "--train", "600",
        "--test", "10", "--seed", "2",
    ])?;
    run(&["train", "--data", "syn", "--out", "train", "--profile", "desk", "--seed", "3"])?;
    let ckpt = format!("train/{CHECKPOINT_FILE}");
    run(&["eval", "--data", "syn", "--out", "eval", "--ckpt", &ckpt])?;
    run(&["eval", "--data", "syn", "--out", "base", "--baseline", "identity"])?;

    let losses = fs::read_to_string(root.join("train").join(LOSSES_FILE)).map_err(|e| e.to_string())?;
    let l1 = losses
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).and_then(|v| v.parse().ok()).ok_or("bad losses row"))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(Desk {
        root: root.to_owned(),
        l1,
        model: results(&root.join("eval"))?,
        baseline: results(&root.join("base"))?,
    })
}

fn training_smoke(d: &Desk) -> Outcome {
    ensure(d.l1.len() == 20, || format!("{} epochs recorded", d.l1.len()))?;
    let first = d.l1[..5].iter().sum::<f64>() / 5.0;
    let last = d.l1[15..].iter().sum::<f64>() / 5.0;
    ensure(last < first, || format!("L1 first5 {first:.5} last5 {last:.5}"))?;
    ensure(d.model["records"] == 100, || format!("held-out records {}", d.model["records"]))?;
    let acc_den = number(&d.model, &["overall", "acc"])?;
    let acc_con = number(&d.baseline, &["overall", "acc"])?;
    let rt_den = number(&d.model, &["overall", "rrmse_temporal"])?;
    let rt_con = number(&d.baseline, &["overall", "rrmse_temporal"])?;
    let summary = format!(
        "L1 {first:.4}->{last:.4}, ACC {acc_con:.4}->{acc_den:.4}, RRMSE_t {rt_con:.4}->{rt_den:.4}"
    );
    ensure(acc_den - acc_con >= 0.05, || summary.clone())?;
    ensure(rt_den < rt_con, || summary.clone())?;
    Ok(summary)
}

fn band_direction(d: &Desk) -> Outcome {
    let run = |args: &[&str]| cli(&d.root, args);
    run(&["fixtures", "--out", "fx7", "--eeg-count", "560", "--emg-count", "610", "--seed", "4"])?;
    run(&[
        "synth", "--eeg", "fx7/eeg.f64", "--emg", "fx7/emg.f64", "--out", "syn7", "--expand", "610", "--train", "560",
        "--test", "50", "--seed", "5", "--snr-min", "-7", "--snr-max", "-7",
    ])?;
    let ckpt = format!("train/{CHECKPOINT_FILE}");
    run(&["eval", "--data", "syn7", "--out", "eval7", "--ckpt", &ckpt, "--band-snr", "-7"])?;
    let r = results(&d.root.join("eval7"))?;
    ensure(r["records"] == 50, || format!("records {}", r["records"]))?;
    let gamma = |which: &str| number(&r, &["bands", which, "gamma"]);
    let (con, clean, den) = (gamma("contaminated")?, gamma("ground_truth")?, gamma("denoised")?);
    let summary = format!("gamma contaminated {con:.4}, denoised {den:.4}, clean {clean:.4}");
    ensure(con > clean, || summary.clone())?;
    ensure((den - clean).abs() < (con - clean).abs(), || summary.clone())?;
    Ok(summary)
}

fn bookkeeping() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    cli(d, &["fixtures", "--out", "fx", "--eeg-count", "4514", "--emg-count", "5598", "--seed", "1"])?;
    cli(d, &["synth", "--eeg", "fx/eeg.f64", "--emg", "fx/emg.f64", "--out", "syn", "--seed", "2"])?;
    let r = results(&d.join("syn"))?;
    let counts = [
        ("expanded", r["expanded_eeg_segments"].clone(), 5598),
        ("train", r["splits"]["train"]["clean_segments"].clone(), 5000),
        ("test", r["splits"]["test"]["clean_segments"].clone(), 598),
        ("levels", r["snr_levels"].as_array().map_or(0, |a| a.len()).into(), 10),
        ("records", r["total_records"].clone(), 55_980),
    ];
    for (name, got, want) in &counts {
        ensure(got == want, || format!("{name}: {got} != {want}"))?;
    }
    Ok("4514->5598, 5000/598, 10 levels, 55980 records".into())
}

fn determinism(first: &Desk) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = desk_pipeline(tmp.path())?;
    for dir in ["eval", "base"] {
        for f in METRIC_FILES {
            let a = fs::read(first.root.join(dir).join(f)).map_err(|e| e.to_string())?;
            let b = fs::read(second.root.join(dir).join(f)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{dir}/{f} differs"))?;
        }
    }
    Ok(format!("{} metrics files byte-identical", 2 * METRIC_FILES.len()))
}

fn report(id: u32, name: &str, start: Instant, outcome: &Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
        Err(why) => println!("criterion {id} ({name}): FAIL [{secs:.1}s] {why}"),
    }
    outcome.is_ok()
}

fn main() {
    let mut ok = true;
    let mut check = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        ok &= report(id, name, t, &f());
    };
    check(1, "metric oracle equivalence", &mut metrics_oracle);
    check(2, "SNR round trip", &mut snr_round_trip);
    check(3, "codec round trip", &mut codec_round_trip);
    check(4, "gradient check", &mut gradient_check);

    let tmp = tempfile::tempdir().expect("temp dir");
    let t = Instant::now();
    let desk = desk_pipeline(tmp.path());
    let desk_secs = t.elapsed().as_secs_f64();
    match &desk {
        Ok(d) => {
            check(5, "desk training smoke", &mut || training_smoke(d).map(|s| format!("{s} (pipeline {desk_secs:.0}s)")));
            check(6, "band-power direction", &mut || band_direction(d));
        }
        Err(why) => {
            for (id, name) in [(5, "desk training smoke"), (6, "band-power direction")] {
                check(id, name, &mut || Err(format!("desk pipeline failed: {why}")));
            }
        }
    }
    check(7, "dataset bookkeeping", &mut bookkeeping);
    match &desk {
        Ok(d) => check(8, "determinism", &mut || determinism(d)),
        Err(why) => check(8, "determinism", &mut || Err(format!("desk pipeline failed: {why}"))),
    }
    drop(check);

    if !ok {
        std::process::exit(1);
    }
}
