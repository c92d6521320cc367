//! Experiment runner for the exact multimodal-VAE laboratory.
//!
//! Subcommands: `info` (dataset information summary), `audit` (bound audits
//! before and after training, JSON), `sweep-beta` and `sweep-modalities`
//! (CSV/JSON sweep reports). Exit codes: 0 success, 2 config error, 3
//! enumeration-budget error, 4 audit failure, 1 anything else.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{parse_seed_list, ConfigFile, OutputFormat};
use error::{CliError, EXIT_OK};

#[derive(Parser)]
#[command(name = "elbolab", version, about = "Exact multimodal-VAE laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override any config key: --set train.steps=500 --set "sweep.betas=[1.0, 3.0]"
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Comma-separated seed list overriding train.seeds.
    #[arg(long, value_name = "SEEDS")]
    seed_list: Option<String>,
    /// Report format for sweeps: csv (default) or json.
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Parallel jobs for independent sweep points / seeds.
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Add the informational wall-time column (breaks byte-for-byte
    /// determinism of otherwise identical runs).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, pairwise mutual information, and per-preset Δ of the dataset.
    Info {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the exact joint in the distribution text format.
        #[arg(long, value_name = "PATH")]
        dump_dist: Option<PathBuf>,
    },
    /// Bound audits per seed, at initialization and after training.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One trained model per (family, β, seed).
    SweepBeta {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One trained model per (family, modality count, seed).
    SweepModalities {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load(common: &CommonArgs) -> Result<(ConfigFile, commands::RunOptions), CliError> {
    let mut config = ConfigFile::load(&common.config, &common.set)?;
    if let Some(raw) = &common.seed_list {
        let seeds = parse_seed_list(raw)?;
        if seeds.is_empty() {
            return Err(CliError::Config("--seed-list is empty".into()));
        }
        config.train.seeds = seeds;
    }
    let format = match (&common.format, &config.output.format) {
        (Some(f), _) => f.parse()?,
        (None, Some(f)) => f.parse()?,
        (None, None) => OutputFormat::Csv,
    };
    if common.jobs == 0 {
        return Err(CliError::Config("--jobs must be ≥ 1".into()));
    }
    Ok((
        config,
        commands::RunOptions {
            out: common.out.clone(),
            format,
            jobs: common.jobs,
            timings: common.timings,
        },
    ))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Info { common, dump_dist } => {
            let (config, options) = load(&common)?;
            commands::cmd_info(&config, options.out.as_deref(), dump_dist.as_deref())
        }
        Command::Audit { common } => {
            let (config, options) = load(&common)?;
            commands::cmd_audit(&config, &options)
        }
        Command::SweepBeta { common } => {
            let (config, options) = load(&common)?;
            commands::cmd_sweep_beta(&config, &options)
        }
        Command::SweepModalities { common } => {
            let (config, options) = load(&common)?;
            commands::cmd_sweep_modalities(&config, &options)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => std::process::exit(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
