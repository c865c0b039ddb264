use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use vaeattack::config::parse_config;
use vaeattack::runner::{resolve_out_dir, run_experiments, OUT_DIR_ENV};
use vaeattack::synth::{make_synthetic, SynthKind};

#[derive(Parser)]
#[command(name = "vaeattack", version, about = "VAE-driven evasion and poisoning attacks on tabular classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a config file.
    Run {
        /// TOML experiment file; `[grid]` arrays expand into one run per combination.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, help = format!("Output directory (overrides ${OUT_DIR_ENV} and the config's `output`)"))]
        out: Option<PathBuf>,
        /// Parallel experiments; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
        /// Replaces the seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic two-class Gaussian dataset as CSV.
    Synth {
        /// separable_gaussians (50/50) or imbalanced_gaussians (90/10).
        #[arg(long)]
        kind: SynthKind,
        /// Number of rows.
        #[arg(long)]
        n: usize,
        /// Number of features.
        #[arg(long)]
        f: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV file to write; the label column is `label`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed,
        } => {
            let mut configs = parse_config(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(seed) = seed {
                configs.iter_mut().for_each(|c| c.seed = seed);
            }
            let out_dir = resolve_out_dir(out.as_deref(), &configs);
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            log::info!("{} experiment(s) on {workers} worker(s) -> {}", configs.len(), out_dir.display());
            let summary = run_experiments(&configs, &out_dir, workers)?;
            let failed = summary.failures();
            println!(
                "{} ok, {failed} failed; wrote {}",
                summary.records.len() - failed,
                summary.out_dir.join("summary.csv").display()
            );
            Ok(if failed > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Synth { kind, n, f, seed, out } => {
            let ds = make_synthetic(kind, n, f, seed, &out).with_context(|| format!("writing {}", out.display()))?;
            let (zeros, ones) = ds.class_counts();
            println!("wrote {} ({zeros} negatives, {ones} positives)", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
