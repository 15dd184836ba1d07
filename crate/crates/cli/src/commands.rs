use crate::args::{Baseline, DenoiseArgs, EvalArgs, FixturesArgs, SynthArgs, TrainArgs};
use crate::config::{resolve, EvalSettings, Flags, SynthSettings, TrainSettings};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::plot::{Chart, Series};
use emgscrub_core::codec::{encode, export_png};
use emgscrub_core::dataset::synthetic::{eeg_corpus, emg_corpus};
use emgscrub_core::dataset::{
    load_contaminated, load_corpus, save_contaminated, save_corpus, snr_levels, synthesize, Corpus,
    CorpusFormat, ContaminatedCorpus, SynthConfig, CONTAMINATED_MANIFEST, CONTAMINATED_PAYLOAD,
};
use emgscrub_core::metrics::{
    band_ratios, band_table_csv, evaluate_with, psd_with, BandPowers, Denoiser, Evaluation,
    IdentityDenoiser, MetricsRow,
};
use emgscrub_core::rng::{stream, Domain};
use emgscrub_core::{Segment, SegmentKind, SAMPLE_RATE_HZ};
use emgscrub_gan::train::PairedImages;
use emgscrub_gan::{
    Checkpoint, DiscriminatorConfig, EpochStats, GanDenoiser, GanError, GeneratorConfig, TrainConfig,
    Trainer,
};
use serde_json::json;
use std::collections::HashMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

pub const CLEAN_FILE: &str = "clean.f64";
pub const CHECKPOINT_FILE: &str = "checkpoint.ckpt";
pub const LOSSES_FILE: &str = "losses.csv";
pub const DETAIL_FILE: &str = "metrics_detail.csv";
pub const SUMMARY_FILE: &str = "metrics_by_snr.csv";
pub const AVERAGES_FILE: &str = "table1_averages.csv";
pub const BANDS_FILE: &str = "band_ratios.csv";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `dir/<name>` when `dir` is a `synth` output, else `dir` itself.
pub fn split_dir(dir: &Path, name: &str) -> PathBuf {
    let nested = dir.join(name);
    if nested.join(CONTAMINATED_MANIFEST).exists() {
        nested
    } else {
        dir.to_owned()
    }
}

pub fn load_split(dir: &Path) -> Result<(ContaminatedCorpus, Corpus)> {
    let contaminated = load_contaminated(dir)?;
    let clean = load_corpus(&dir.join(CLEAN_FILE), CorpusFormat::RawF64Le, SegmentKind::CleanEeg)?;
    Ok((contaminated, clean))
}

fn format_for(path: &Path, explicit: Option<crate::args::FormatArg>) -> CorpusFormat {
    explicit.map(Into::into).unwrap_or_else(|| CorpusFormat::from_path(path))
}

fn extension(format: CorpusFormat) -> &'static str {
    match format {
        CorpusFormat::RawF32Le => "f32",
        CorpusFormat::RawF64Le => "f64",
        CorpusFormat::Csv => "csv",
    }
}

pub fn fixtures(args: &FixturesArgs) -> Result<()> {
    create_dir(&args.out)?;
    let format: CorpusFormat = args.format.into();
    let mut m = RunManifest::begin(
        "fixtures",
        &json!({"eeg_count": args.eeg_count, "emg_count": args.emg_count, "format": format}),
    );
    m.seed("fixtures", args.seed);
    for (name, corpus) in [
        ("eeg", eeg_corpus(args.eeg_count, args.seed)?),
        ("emg", emg_corpus(args.emg_count, args.seed)?),
    ] {
        let file = format!("{name}.{}", extension(format));
        save_corpus(&corpus, &args.out.join(&file), format)?;
        m.output(&args.out, &file)?;
        if format != CorpusFormat::Csv {
            m.output(&args.out, format!("{file}.json"))?;
        }
    }
    m.finish(&args.out)?;
    Ok(())
}

pub fn synth(args: &SynthArgs, config: Option<&Path>) -> Result<()> {
    let flags = Flags::default()
        .set("snr_min", args.snr_min)
        .set("snr_max", args.snr_max)
        .set("expand", args.expand)
        .set("train", args.train)
        .set("test", args.test)
        .set("seed", args.seed)
        .set("shuffle", args.no_shuffle.then_some(false));
    let s: SynthSettings = resolve(config, "synth", flags.into_map())?;
    let seed = s.seed.ok_or_else(|| CliError::Args("--seed is required".into()))?;
    let cfg = SynthConfig {
        expand_to: s.expand,
        train_count: s.train,
        test_count: s.test,
        snr_levels: snr_levels(s.snr_min, s.snr_max)?,
        seed,
        shuffle: s.shuffle,
    };
    let mut m = RunManifest::begin("synth", &s);
    m.seed("synth", seed);
    let eeg = load_corpus(&args.eeg, format_for(&args.eeg, args.eeg_format), SegmentKind::CleanEeg)?;
    let emg = load_corpus(&args.emg, format_for(&args.emg, args.emg_format), SegmentKind::Emg)?;
    m.input(&args.eeg)?;
    m.input(&args.emg)?;
    eprintln!(
        "synth: {} EEG, {} EMG segments; expand to {}, split {}/{}, {} SNR levels",
        eeg.len(),
        emg.len(),
        cfg.expand_to,
        cfg.train_count,
        cfg.test_count,
        cfg.snr_levels.len()
    );
    let out = synthesize(&eeg, &emg, &cfg)?;
    create_dir(&args.out)?;
    let mut splits = serde_json::Map::new();
    let mut total = 0;
    for (name, split) in [("train", &out.train), ("test", &out.test)] {
        let dir = args.out.join(name);
        save_contaminated(&split.contaminated, &dir)?;
        save_corpus(&split.clean, &dir.join(CLEAN_FILE), CorpusFormat::RawF64Le)?;
        for file in [CONTAMINATED_MANIFEST, CONTAMINATED_PAYLOAD, CLEAN_FILE] {
            m.output(&args.out, Path::new(name).join(file))?;
        }
        m.output(&args.out, Path::new(name).join(format!("{CLEAN_FILE}.json")))?;
        total += split.contaminated.len();
        splits.insert(
            name.into(),
            json!({
                "clean_segments": split.clean.len(),
                "emg_segments": split.emg.len(),
                "records": split.contaminated.len(),
                "records_per_level": split.contaminated.per_level(),
            }),
        );
    }
    m.results = json!({
        "eeg_input_segments": eeg.len(),
        "emg_input_segments": emg.len(),
        "expanded_eeg_segments": out.expanded_eeg_len,
        "snr_levels": cfg.snr_levels,
        "splits": splits,
        "total_records": total,
    });
    m.finish(&args.out)?;
    eprintln!("synth: wrote {total} records to {}", args.out.display());
    Ok(())
}

pub fn losses_csv(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch,loss_d,loss_g_adv,loss_l1,loss_g_total,d_steps,g_steps\n");
    for s in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.epoch, s.loss_d, s.loss_g_adv, s.loss_l1, s.loss_g_total, s.d_steps, s.g_steps
        );
    }
    out
}

fn train_settings(args: &TrainArgs, config: Option<&Path>) -> Result<TrainSettings> {
    let flags = Flags::default()
        .set("profile", args.profile)
        .set("epochs", args.epochs)
        .set("pairs", args.pairs)
        .set("batch", args.batch)
        .set("l1_weight", args.l1_weight)
        .set("lr", args.lr)
        .set("beta1", args.beta1)
        .set("beta2", args.beta2)
        .set("dropout", args.dropout)
        .set("seed", args.seed)
        .set("base_channels", args.base_channels)
        .set("resnet_blocks", args.resnet_blocks)
        .set("disc_base_channels", args.disc_base_channels)
        .set("disc_head", args.disc_head)
        .set("target_scale", args.target_scale);
    resolve(config, "train", flags.into_map())
}

/// Indices of the training records used: all of them, or `pairs` drawn
/// without replacement and returned in corpus order.
pub fn select_pairs(available: usize, pairs: Option<usize>, seed: u64) -> Result<Vec<usize>> {
    match pairs {
        None => Ok((0..available).collect()),
        Some(p) if p > available => Err(CliError::Args(format!(
            "{p} training pairs requested, the split holds {available}"
        ))),
        Some(0) => Err(CliError::Args("--pairs must be >= 1".into())),
        Some(p) => {
            let mut v = rand::seq::index::sample(&mut stream(seed, Domain::Subsample, 0), available, p).into_vec();
            v.sort_unstable();
            Ok(v)
        }
    }
}

pub fn train(args: &TrainArgs, config: Option<&Path>) -> Result<()> {
    let s = train_settings(args, config)?;
    let epochs = s.resolved_epochs();
    let dir = split_dir(&args.data, "train");
    let (records, clean) = load_split(&dir)?;
    let chosen = select_pairs(records.len(), s.resolved_pairs(), s.seed)?;
    let mut m = RunManifest::begin("train", &json!({"settings": s, "resolved_epochs": epochs, "pairs": chosen.len()}));
    m.seed("train", s.seed);
    m.input(&dir.join(CONTAMINATED_PAYLOAD))?;
    m.input(&dir.join(CLEAN_FILE))?;

    let mut trainer = match &args.resume {
        Some(path) => {
            m.input(path)?;
            let mut t = Trainer::from_checkpoint(&Checkpoint::load(path)?)?;
            t.config.epochs = epochs;
            t
        }
        None => {
            let gcfg = GeneratorConfig {
                base_channels: s.base_channels,
                max_channels: 4 * s.base_channels,
                n_resnet_blocks: s.resnet_blocks,
                ..GeneratorConfig::default()
            };
            let dcfg = DiscriminatorConfig {
                base_channels: s.disc_base_channels,
                max_channels: 8 * s.disc_base_channels,
                head: s.disc_head.into(),
                ..DiscriminatorConfig::default()
            };
            let tcfg = TrainConfig {
                l1_weight: s.l1_weight,
                learning_rate: s.lr,
                adam_beta1: s.beta1,
                adam_beta2: s.beta2,
                batch_size: s.batch,
                epochs,
                seed: s.seed,
                dropout: s.dropout,
                target_scale: s.target_scale.into(),
            };
            Trainer::new(gcfg, dcfg, tcfg)?
        }
    };
    let data = PairedImages::from_segments(
        chosen.iter().map(|&i| {
            let r = &records.records[i];
            (&r.contaminated, &clean.segments()[r.clean_index])
        }),
        trainer.config.target_scale,
    );
    eprintln!(
        "train: {} pairs, {} epochs, batch {}, seed {}",
        data.len(),
        epochs,
        trainer.config.batch_size,
        trainer.config.seed
    );
    create_dir(&args.out)?;
    let started = std::time::Instant::now();
    let outcome = trainer.run(&data, |e| {
        eprintln!(
            "epoch {:>3}  D {:.4}  G_adv {:.4}  L1 {:.4}  G {:.4}  [{:.0}s]",
            e.epoch,
            e.loss_d,
            e.loss_g_adv,
            e.loss_l1,
            e.loss_g_total,
            started.elapsed().as_secs_f64()
        )
    });
    write(&args.out.join(LOSSES_FILE), &losses_csv(trainer.history()))?;
    if let Err(e) = outcome {
        if let GanError::NonFiniteLoss { .. } = e {
            eprintln!(
                "train: stopped after {} completed epochs; partial history in {}",
                trainer.history().len(),
                args.out.join(LOSSES_FILE).display()
            );
        }
        return Err(e.into());
    }
    trainer.checkpoint().save(&args.out.join(CHECKPOINT_FILE))?;
    m.output(&args.out, CHECKPOINT_FILE)?;
    m.output(&args.out, LOSSES_FILE)?;
    let last = trainer.history().last().cloned();
    m.results = json!({"epochs_completed": trainer.epoch(), "pairs": data.len(), "final": last});
    m.finish(&args.out)?;
    Ok(())
}

fn load_denoiser(path: &Path) -> Result<GanDenoiser> {
    Ok(GanDenoiser::from_checkpoint(&Checkpoint::load(path)?)?)
}

pub fn denoise(args: &DenoiseArgs) -> Result<()> {
    let den = load_denoiser(&args.ckpt)?;
    let mut m = RunManifest::begin(
        "denoise",
        &json!({"export_png": args.export_png, "png_limit": args.png_limit}),
    );
    m.input(&args.ckpt)?;
    let (inputs, clean, out_format): (Vec<Segment>, Option<Vec<Segment>>, CorpusFormat) = if args.input.is_dir() {
        let c = load_contaminated(&args.input)?;
        m.input(&args.input.join(CONTAMINATED_PAYLOAD))?;
        let clean = match &args.clean {
            Some(p) => {
                let corpus = load_corpus(p, CorpusFormat::from_path(p), SegmentKind::CleanEeg)?;
                let picked = c
                    .records
                    .iter()
                    .map(|r| {
                        corpus.get(r.clean_index).cloned().ok_or_else(|| {
                            CliError::Data(emgscrub_core::Error::InvalidData(format!(
                                "clean index {} outside reference of {}",
                                r.clean_index,
                                corpus.len()
                            )))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(picked)
            }
            None => None,
        };
        (c.records.into_iter().map(|r| r.contaminated).collect(), clean, CorpusFormat::RawF64Le)
    } else {
        let format = format_for(&args.input, args.format);
        let c = load_corpus(&args.input, format, SegmentKind::Contaminated)?;
        m.input(&args.input)?;
        let clean = match &args.clean {
            Some(p) => {
                let corpus = load_corpus(p, CorpusFormat::from_path(p), SegmentKind::CleanEeg)?;
                if corpus.len() != c.len() {
                    return Err(CliError::Data(emgscrub_core::Error::InvalidData(format!(
                        "clean reference has {} segments, input has {}",
                        corpus.len(),
                        c.len()
                    ))));
                }
                Some(corpus.segments().to_vec())
            }
            None => None,
        };
        (c.segments().to_vec(), clean, format)
    };
    if let Some(p) = &args.clean {
        m.input(p)?;
    }
    let denoised = den.denoise_segments(&inputs)?;
    create_dir(&args.out)?;
    let file = format!("denoised.{}", extension(out_format));
    save_corpus(&Corpus::new(denoised.clone(), SegmentKind::Denoised)?, &args.out.join(&file), out_format)?;
    m.output(&args.out, &file)?;
    if out_format != CorpusFormat::Csv {
        m.output(&args.out, format!("{file}.json"))?;
    }
    let mut pngs = 0;
    match (&clean, args.export_png) {
        (Some(clean), true) => {
            let dir = args.out.join("png");
            create_dir(&dir)?;
            for (i, ((c, d), x)) in inputs.iter().zip(&denoised).zip(clean).take(args.png_limit).enumerate() {
                for (tag, seg) in [("contaminated", c), ("denoised", d), ("clean", x)] {
                    let rel = format!("png/{i:05}_{tag}.png");
                    export_png(&encode(seg).0, &args.out.join(&rel))?;
                    m.output(&args.out, &rel)?;
                    pngs += 1;
                }
            }
        }
        (None, true) => eprintln!("denoise: --export-png needs --clean; no images written"),
        _ => {}
    }
    m.results = json!({"segments": denoised.len(), "png_files": pngs});
    m.finish(&args.out)?;
    eprintln!("denoise: {} segments -> {}", denoised.len(), args.out.join(file).display());
    Ok(())
}

/// Looks the clean reference up by exact contaminated samples.
pub struct OracleDenoiser {
    table: HashMap<Vec<u64>, Segment>,
}

impl OracleDenoiser {
    pub fn new(test: &ContaminatedCorpus, clean: &Corpus) -> Self {
        let table = test
            .records
            .iter()
            .filter_map(|r| {
                let key = r.contaminated.samples().iter().map(|v| v.to_bits()).collect();
                clean.get(r.clean_index).map(|x| (key, x.clone().with_kind(SegmentKind::Denoised)))
            })
            .collect();
        OracleDenoiser { table }
    }
}

impl Denoiser for OracleDenoiser {
    fn name(&self) -> &str {
        "oracle"
    }

    fn denoise(&self, contaminated: &Segment) -> emgscrub_core::Result<Segment> {
        let key: Vec<u64> = contaminated.samples().iter().map(|v| v.to_bits()).collect();
        self.table
            .get(&key)
            .cloned()
            .ok_or_else(|| emgscrub_core::Error::InvalidData("segment not in the test corpus".into()))
    }
}

fn eval_settings(args: &EvalArgs, config: Option<&Path>, section: &str) -> Result<EvalSettings> {
    let flags = Flags::default()
        .set("psd", args.psd)
        .set("welch_len", args.welch_len)
        .set("welch_overlap", args.welch_overlap)
        .set("spectral_range", args.spectral_range)
        .set("band_snr", args.band_snr)
        .set("segment", args.segment)
        .set("plot_snr", args.plot_snr);
    resolve(config, section, flags.into_map())
}

/// Mean band ratios of denoised, clean and contaminated segments at one
/// SNR level (all levels when the corpus lacks it).
pub fn band_table(
    den: &dyn Denoiser,
    test: &ContaminatedCorpus,
    clean: &Corpus,
    level: i32,
    s: &EvalSettings,
) -> Result<(Option<i32>, [BandPowers; 3])> {
    let used = test.snr_levels.contains(&level).then_some(level);
    let records: Vec<_> = test
        .records
        .iter()
        .filter(|r| used.is_none_or(|l| r.target_snr_db == l as f64))
        .collect();
    let inputs: Vec<Segment> = records.iter().map(|r| r.contaminated.clone()).collect();
    let denoised = den.denoise_batch(&inputs)?;
    let method = s.psd_method();
    let ratios = |seg: &Segment| -> emgscrub_core::Result<[f64; 5]> {
        Ok(band_ratios(&psd_with(seg.samples(), SAMPLE_RATE_HZ, method)?)?.as_array())
    };
    let mut sums = [[0.0; 5]; 3];
    for (i, (r, d)) in records.iter().zip(&denoised).enumerate() {
        let x = &clean.segments()[r.clean_index];
        for (sum, seg) in sums.iter_mut().zip([d, x, &r.contaminated]) {
            let v = ratios(seg).map_err(|e| emgscrub_core::Error::at(i, e))?;
            sum.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
    }
    let n = records.len() as f64;
    Ok((used, sums.map(|s| BandPowers::from_array(s.map(|v| v / n)))))
}

pub struct EvalOutput {
    pub evaluation: Evaluation,
    pub settings: EvalSettings,
    pub test: ContaminatedCorpus,
    pub clean: Corpus,
}

fn run_eval(args: &EvalArgs, config: Option<&Path>, section: &str, den: &dyn Denoiser) -> Result<EvalOutput> {
    let s = eval_settings(args, config, section)?;
    let dir = split_dir(&args.data, "test");
    let (test, clean) = load_split(&dir)?;
    if test.is_empty() {
        return Err(CliError::Data(emgscrub_core::Error::InvalidData("empty test corpus".into())));
    }
    let mut m = RunManifest::begin(section, &json!({"settings": s, "denoiser": den.name()}));
    m.input(&dir.join(CONTAMINATED_PAYLOAD))?;
    m.input(&dir.join(CLEAN_FILE))?;
    if let Some(p) = &args.ckpt {
        m.input(p)?;
    }
    eprintln!("{section}: {} on {} test records", den.name(), test.len());
    let ev = evaluate_with(den, &test, &clean, s.spectral())?;
    let (band_level, bands) = band_table(den, &test, &clean, s.band_snr, &s)?;

    create_dir(&args.out)?;
    write(&args.out.join(DETAIL_FILE), &ev.details_csv())?;
    write(&args.out.join(SUMMARY_FILE), &ev.summary_csv())?;
    write(&args.out.join(AVERAGES_FILE), &ev.averages_csv())?;
    write(
        &args.out.join(BANDS_FILE),
        &band_table_csv(&[("denoised", bands[0]), ("ground truth", bands[1]), ("contaminated", bands[2])]),
    )?;
    for f in [DETAIL_FILE, SUMMARY_FILE, AVERAGES_FILE, BANDS_FILE] {
        m.output(&args.out, f)?;
    }
    if section == "report" {
        for f in plots(&args.out, den, &ev, &test, &clean, &s)? {
            m.output(&args.out, f)?;
        }
    }
    m.results = json!({
        "denoiser": den.name(),
        "records": test.len(),
        "overall": ev.overall,
        "band_snr": band_level,
        "bands": {"denoised": bands[0], "ground_truth": bands[1], "contaminated": bands[2]},
    });
    m.finish(&args.out)?;
    let o = &ev.overall;
    eprintln!(
        "{section}: CC {:.4}  RRMSE_t {:.4}  RRMSE_s {:.4}",
        o.acc, o.rrmse_temporal, o.rrmse_spectral
    );
    Ok(EvalOutput {
        evaluation: ev,
        settings: s,
        test,
        clean,
    })
}

fn plots(
    out: &Path,
    den: &dyn Denoiser,
    ev: &Evaluation,
    test: &ContaminatedCorpus,
    clean: &Corpus,
    s: &EvalSettings,
) -> Result<Vec<&'static str>> {
    let mut curves = vec![(den.name().to_owned(), ev.rows.clone())];
    if den.name() != "identity" {
        let base = evaluate_with(&IdentityDenoiser, test, clean, s.spectral())?;
        curves.push(("contaminated".to_owned(), base.rows));
    }
    let metric_charts: [(&str, &str, fn(&MetricsRow) -> f64); 3] = [
        ("acc_vs_snr.svg", "CC", |r| r.acc),
        ("rrmse_temporal_vs_snr.svg", "RRMSE temporal", |r| r.rrmse_temporal),
        ("rrmse_spectral_vs_snr.svg", "RRMSE spectral", |r| r.rrmse_spectral),
    ];
    let mut files = Vec::new();
    for (file, label, pick) in metric_charts {
        let chart = Chart {
            title: format!("{label} vs SNR"),
            x_label: "SNR (dB)".into(),
            y_label: label.into(),
            log_y: false,
            series: curves
                .iter()
                .map(|(name, rows)| Series {
                    name: name.clone(),
                    points: rows.iter().map(|r| (r.snr_level as f64, pick(r))).collect(),
                    markers: true,
                })
                .collect(),
        };
        write(&out.join(file), &chart.to_svg())?;
        files.push(file);
    }

    let level = if test.snr_levels.contains(&s.plot_snr) {
        s.plot_snr
    } else {
        test.snr_levels[0]
    };
    let at_level: Vec<_> = test.records_at(level).collect();
    let r = at_level.get(s.segment).ok_or_else(|| {
        CliError::Args(format!(
            "--segment {} out of range: {} records at {level} dB",
            s.segment,
            at_level.len()
        ))
    })?;
    let denoised = den.denoise(&r.contaminated)?;
    let method = s.psd_method();
    let series = [
        ("clean", &clean.segments()[r.clean_index]),
        ("contaminated", &r.contaminated),
        ("denoised", &denoised),
    ]
    .into_iter()
    .map(|(name, seg)| {
        let p = psd_with(seg.samples(), SAMPLE_RATE_HZ, method)?;
        Ok(Series {
            name: name.into(),
            points: p.freqs.iter().copied().zip(p.power.iter().copied()).skip(1).collect(),
            markers: false,
        })
    })
    .collect::<emgscrub_core::Result<Vec<_>>>()?;
    let chart = Chart {
        title: format!("PSD, record {} at {level} dB", s.segment),
        x_label: "Frequency (Hz)".into(),
        y_label: "Power density".into(),
        log_y: true,
        series,
    };
    write(&out.join("psd_overlay.svg"), &chart.to_svg())?;
    files.push("psd_overlay.svg");
    Ok(files)
}

pub fn eval(args: &EvalArgs, config: Option<&Path>, section: &str) -> Result<EvalOutput> {
    match (&args.ckpt, args.baseline) {
        (Some(path), _) => run_eval(args, config, section, &load_denoiser(path)?),
        (None, Some(Baseline::Identity)) => run_eval(args, config, section, &IdentityDenoiser),
        (None, Some(Baseline::Oracle)) => {
            let dir = split_dir(&args.data, "test");
            let (test, clean) = load_split(&dir)?;
            run_eval(args, config, section, &OracleDenoiser::new(&test, &clean))
        }
        (None, None) => Err(CliError::Args("one of --ckpt or --baseline is required".into())),
    }
}
