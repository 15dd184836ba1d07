//! Pipeline orchestration behind the `emgscrub` binary.
//!
//! Every subcommand writes its outputs plus a `run_manifest.json` into its
//! `--out` directory. Exit codes are listed in [`error::exit`].

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

use args::{Cli, Command};
pub use error::{CliError, Result};

pub const THREADS_ENV: &str = "EMGSCRUB_THREADS";

/// Cap the worker pool at `EMGSCRUB_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Args(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    // A pool that already exists (e.g. in tests) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Fixtures(a) => commands::fixtures(a),
        Command::Synth(a) => commands::synth(a, config),
        Command::Train(a) => commands::train(a, config),
        Command::Denoise(a) => commands::denoise(a),
        Command::Eval(a) => commands::eval(a, config, "eval").map(|_| ()),
        Command::Report(a) => commands::eval(a, config, "report").map(|_| ()),
    }
}
