//! `bplab` experiment runner. Each subcommand reads an optional JSON config
//! that overrides the built-in defaults key by key, and writes CSV tables
//! with JSON sidecars into the output directory.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use output::Output;

#[derive(Parser)]
#[command(name = "bplab", version, about = "Barren-plateau and entanglement experiments on layered 1D circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON object overriding the default experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Paper-scale defaults. Runs take hours.
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Gradient variance over n, n_C, scheme and L.
    VarianceSweep,
    /// Gradient variance against mean output entropy along an L sweep.
    VarianceVsEntropy,
    /// Training runs over cost, scheme, gradient mode and seed.
    Train,
    /// Collective-entanglement pretraining with variance probes.
    Pretrain,
    /// Ground-state compressor dataset.
    CompressorData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VarianceSweep => "variance_sweep",
            Command::VarianceVsEntropy => "variance_vs_entropy",
            Command::Train => "train",
            Command::Pretrain => "pretrain",
            Command::CompressorData => "compressor_data",
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring thread pool")?;
    }
    let overlay = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let cfg = ExperimentConfig::resolve(cli.command, cli.full, overlay.as_deref(), cli.seed)?;
    let mut out = Output::new(&cli.out, cli.command.name(), &cfg)?;
    let start = Instant::now();
    match cli.command {
        Command::VarianceSweep => commands::variance_sweep(&cfg, &mut out)?,
        Command::VarianceVsEntropy => commands::variance_vs_entropy(&cfg, &mut out)?,
        Command::Train => commands::train_cmd(&cfg, &mut out)?,
        Command::Pretrain => commands::pretrain_cmd(&cfg, &mut out)?,
        Command::CompressorData => commands::compressor_data(&cfg, &mut out)?,
    }
    log::info!("{} finished in {:.1}s, outputs in {}", cli.command.name(), start.elapsed().as_secs_f64(), out.dir().display());
    out.finish()
}
