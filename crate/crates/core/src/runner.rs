//! Runs a list of experiments and writes `summary.csv` plus one
//! `run_<index>.json` per experiment.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{run_experiment, AttackReport};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Overrides the output directory named in a config file.
pub const OUT_DIR_ENV: &str = "VAEATTACK_OUT";
pub const DEFAULT_OUT_DIR: &str = "results";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const SUMMARY_COLUMNS: [&str; 21] = [
    "dataset",
    "attack",
    "victim",
    "generator",
    "wavelet",
    "activation",
    "latent_dim",
    "epochs",
    "lr",
    "momentum",
    "optimizer",
    "batch_size",
    "seed",
    "chaos_seed",
    "auc_before",
    "auc_after",
    "delta",
    "roc_auc_before",
    "roc_auc_after",
    "status",
    "wall_time_ms",
];

/// Outcome of one experiment as written to `run_<index>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub status: String,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub report: Option<AttackReport>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.report.is_some()
    }

    fn summary_row(&self) -> Vec<String> {
        let c = &self.config;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let r = self.report.as_ref();
        vec![
            c.dataset_id(),
            c.attack.to_string(),
            c.victim.to_string(),
            r.map(|r| r.generator.clone()).unwrap_or_else(|| c.generator.to_string()),
            c.wavelet.map(|w| w.to_string()).unwrap_or_default(),
            c.activation.map(|a| a.to_string()).unwrap_or_default(),
            c.latent_dim.to_string(),
            c.epochs.to_string(),
            c.lr.to_string(),
            c.momentum.to_string(),
            c.optimizer.to_string(),
            c.batch_size.to_string(),
            c.seed.to_string(),
            opt(c.chaos_seed),
            opt(r.map(|r| r.auc_before)),
            opt(r.map(|r| r.auc_after)),
            opt(r.map(|r| r.delta)),
            opt(r.and_then(|r| r.roc_auc_before)),
            opt(r.and_then(|r| r.roc_auc_after)),
            self.status.clone(),
            r.map(|r| r.wall_time_ms.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub records: Vec<RunRecord>,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn any_failed(&self) -> bool {
        self.failures() > 0
    }
}

/// Output directory precedence: explicit argument, then the
/// `VAEATTACK_OUT` environment variable, then the first config's `output`,
/// then `results`.
pub fn resolve_out_dir(explicit: Option<&Path>, configs: &[ExperimentConfig]) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    configs
        .iter()
        .find_map(|c| c.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs every config on a pool of `workers` threads. A failing experiment
/// becomes an error record and the rest still run; records come back in
/// config order.
pub fn run_experiments(configs: &[ExperimentConfig], out_dir: &Path, workers: usize) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::State(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, cfg)| {
                let record = match run_experiment(cfg) {
                    Ok(outcome) => RunRecord {
                        index,
                        status: "ok".into(),
                        error: None,
                        config: cfg.clone(),
                        report: Some(outcome.report),
                    },
                    Err(e) => RunRecord {
                        index,
                        status: "error".into(),
                        error: Some(e.to_string()),
                        config: cfg.clone(),
                        report: None,
                    },
                };
                match &record.error {
                    None => log::info!("run {index}: ok"),
                    Some(e) => log::warn!("run {index}: {e}"),
                }
                record
            })
            .collect()
    });

    for record in &records {
        let path = out_dir.join(format!("run_{}.json", record.index));
        let json = serde_json::to_string_pretty(record).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, json + "\n")?;
    }
    write_summary(&out_dir.join(SUMMARY_FILE), &records)?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        records,
    })
}

fn write_summary(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for r in records {
        w.write_record(r.summary_row())?;
    }
    w.flush()?;
    Ok(())
}
