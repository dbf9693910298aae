//! Command-line driver: `timecnn <command> --config PATH [--set k=v]... [--out DIR]`.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::commands::Context;
use crate::config::{load_config, RunConfig};
use crate::error::{CliError, CliResult};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "TIMECNN_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Train, test and save a model (one run per seed).
    Train,
    /// Score a saved checkpoint on the test split.
    Eval,
    /// Train every mixer variant with the same recipe and compare.
    Ablate,
    /// Parameter and MAC counts plus inference timing.
    Profile,
    /// Segment or rolling Pearson correlations of the raw series.
    Correlate,
    /// Test-time Gaussian noise on one variable.
    Noise,
    /// Write the synthetic dataset described by `[data.synthetic]`.
    Synth,
    /// Train and test one model per lookback.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Ablate => "ablate",
            Command::Profile => "profile",
            Command::Correlate => "correlate",
            Command::Noise => "noise",
            Command::Synth => "synth",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "timecnn", version, about = "TimeCNN multivariate forecaster")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config value, e.g. `--set model.token_dim=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (default: `$TIMECNN_OUT/<command>` or `runs/<command>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Shorthand for `--set train.seed=N --set run.seeds=[N]`.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    if let Some(out) = &cli.out {
        return out.clone();
    }
    if let Some(out) = &cfg.run.out_dir {
        return out.clone();
    }
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    root.join(cli.command.name())
}

pub fn execute(cli: &Cli) -> CliResult<PathBuf> {
    let mut overrides = cli.set.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("train.seed={seed}"));
        overrides.push(format!("run.seeds=[{seed}]"));
    }
    let loaded = load_config(&cli.config, &overrides)?;
    let out = out_dir(cli, &loaded.config);
    std::fs::create_dir_all(&out).map_err(|e| CliError::output(&out, e))?;
    let echo = out.join("config.toml");
    std::fs::write(&echo, loaded.config.to_toml()?).map_err(|e| CliError::output(&echo, e))?;

    let ctx = Context::new(loaded, out.clone());
    match cli.command {
        Command::Train => commands::cmd_train(&ctx),
        Command::Eval => commands::cmd_eval(&ctx),
        Command::Ablate => commands::cmd_ablate(&ctx),
        Command::Profile => commands::cmd_profile(&ctx),
        Command::Correlate => commands::cmd_correlate(&ctx),
        Command::Noise => commands::cmd_noise(&ctx),
        Command::Synth => commands::cmd_synth(&ctx),
        Command::Sweep => commands::cmd_sweep(&ctx),
    }?;
    Ok(out)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
