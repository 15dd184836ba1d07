use crate::config::{HeadKind, Profile, PsdKind, RangeKind, ScaleKind};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use emgscrub_core::dataset::CorpusFormat;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "emgscrub", version, about = "Remove EMG artifacts from single-channel EEG segments with a conditional GAN")]
pub struct Cli {
    /// TOML or JSON file with one table per subcommand; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic stand-in EEG and EMG corpora.
    Fixtures(FixturesArgs),
    /// Expand, split and contaminate clean EEG with EMG at each SNR level.
    Synth(SynthArgs),
    /// Train the generator/discriminator pair on a synthesized training split.
    Train(TrainArgs),
    /// Run a trained generator over contaminated segments.
    Denoise(DenoiseArgs),
    /// Score a denoiser on a test split: per-SNR and overall metrics, band ratios.
    Eval(EvalArgs),
    /// `eval` plus metric-vs-SNR and PSD overlay plots.
    Report(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    F32,
    F64,
    Csv,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::F32 => CorpusFormat::RawF32Le,
            FormatArg::F64 => CorpusFormat::RawF64Le,
            FormatArg::Csv => CorpusFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4514)]
    pub eeg_count: usize,
    #[arg(long, default_value_t = 5598)]
    pub emg_count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::F64)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Clean EEG corpus (.f32, .f64 raw little-endian with a .json manifest, or .csv).
    #[arg(long)]
    pub eeg: PathBuf,
    /// EMG corpus; must hold exactly `--expand` segments.
    #[arg(long)]
    pub emg: PathBuf,
    /// Format of --eeg when the extension is ambiguous.
    #[arg(long, value_enum)]
    pub eeg_format: Option<FormatArg>,
    #[arg(long, value_enum)]
    pub emg_format: Option<FormatArg>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_min: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_max: Option<i32>,
    #[arg(long)]
    pub expand: Option<usize>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Split in file order instead of a seeded shuffle.
    #[arg(long)]
    pub no_shuffle: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// `synth` output directory (its `train/` split) or a split directory.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from a checkpoint up to the resolved epoch count.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Number of training pairs, drawn without replacement.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub l1_weight: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub base_channels: Option<usize>,
    #[arg(long)]
    pub resnet_blocks: Option<usize>,
    #[arg(long)]
    pub disc_base_channels: Option<usize>,
    #[arg(long, value_enum)]
    pub disc_head: Option<HeadKind>,
    /// Amplitude range the clean training targets are expressed on.
    #[arg(long, value_enum)]
    pub target_scale: Option<ScaleKind>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    /// Contaminated split directory or a corpus file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub out: PathBuf,
    /// Clean reference: indexed by record for split inputs, aligned for files.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Write contaminated/denoised/clean PNG triplets (needs --clean).
    #[arg(long)]
    pub export_png: bool,
    #[arg(long, default_value_t = 16)]
    pub png_limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    /// Contaminated input passed through unchanged.
    Identity,
    /// Returns the clean reference; an upper bound.
    Oracle,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("model").required(true).args(["ckpt", "baseline"])))]
pub struct EvalArgs {
    /// `synth` output directory (its `test/` split) or a split directory.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    #[arg(long, value_enum)]
    pub psd: Option<PsdKind>,
    #[arg(long)]
    pub welch_len: Option<usize>,
    #[arg(long)]
    pub welch_overlap: Option<usize>,
    #[arg(long, value_enum)]
    pub spectral_range: Option<RangeKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub band_snr: Option<i32>,
    #[arg(long)]
    pub segment: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub plot_snr: Option<i32>,
}
