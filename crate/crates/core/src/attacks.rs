//! Evasion and data-poisoning attacks driven by a trained generator.
//!
//! Both pipelines split 70:30 with stratification, fit min–max scaling on
//! the train part, optionally oversample it, and train a victim. Evasion
//! then replaces the test features with generated ones; poisoning replaces
//! the train features and retrains the victim from scratch.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{AttackKind, ExperimentConfig};
use crate::dataprep::{apply_minmax, fit_minmax, load_csv, smote, stratified_split, Dataset};
use crate::error::{Error, Result};
use crate::metrics::AucScore;
use crate::numkernel::Rng;
use crate::vae::{self, LossBreakdown, NoiseSource, TrainHistory, VaeModel};
use crate::victims::{Victim, VictimKind};

/// Describes how wavelet hidden units combine their parameters.
pub const WAVELON_FORM: &str = "y = f((w.x - b) / a)";

/// Every seed a run consumes, all derived from `seed` except the chaos seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub split: u64,
    pub smote: u64,
    pub init: u64,
    pub shuffle: u64,
    /// Gaussian noise stream; unused by chaotic generators.
    pub noise: u64,
    pub chaos_seed: Option<f64>,
}

impl SeedRecord {
    pub fn derive(seed: u64, chaos_seed: Option<f64>) -> Self {
        let mut master = Rng::new(seed);
        let mut next = || master.fork().seed();
        Self {
            seed,
            split: next(),
            smote: next(),
            init: next(),
            shuffle: next(),
            noise: next(),
            chaos_seed,
        }
    }
}

/// What a generator hands back to the pipeline.
#[derive(Debug, Clone)]
pub struct Generated {
    pub samples: Dataset,
    pub history: Option<TrainHistory>,
    /// Loss on the scaled test set with `z = μ`.
    pub test_loss: Option<LossBreakdown>,
}

/// Produces the adversarial dataset X′ from `source`, after fitting on the
/// scaled (and possibly oversampled) `train` partition.
pub trait SampleGenerator {
    fn name(&self, cfg: &ExperimentConfig) -> String;

    fn produce(
        &self,
        cfg: &ExperimentConfig,
        seeds: &SeedRecord,
        train: &Dataset,
        test: &Dataset,
        source: &Dataset,
    ) -> Result<Generated>;
}

/// The configured VAE variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct VaeGenerator;

impl SampleGenerator for VaeGenerator {
    fn name(&self, cfg: &ExperimentConfig) -> String {
        cfg.generator.token().to_string()
    }

    fn produce(
        &self,
        cfg: &ExperimentConfig,
        seeds: &SeedRecord,
        train: &Dataset,
        test: &Dataset,
        source: &Dataset,
    ) -> Result<Generated> {
        let mut init_rng = Rng::new(seeds.init);
        let mut model = VaeModel::new(cfg.generator, &cfg.architecture(train.n_features()), &mut init_rng)?;
        let mut noise = if cfg.generator.is_chaotic() {
            NoiseSource::chaotic(seeds.chaos_seed.unwrap_or(crate::config::DEFAULT_CHAOS_SEED))?
        } else {
            NoiseSource::gaussian(seeds.noise)
        };
        let history = vae::train(&mut model, train.features(), &cfg.train_config(seeds.shuffle), &mut noise)?;
        let test_loss = model.evaluate(test.features())?;
        let samples = vae::generate(&model, source, &mut noise, cfg.deterministic_latent)?;
        Ok(Generated {
            samples,
            history: Some(history),
            test_loss: Some(test_loss),
        })
    }
}

/// Returns the source unchanged; isolates the pipeline from the generator.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThrough;

impl SampleGenerator for PassThrough {
    fn name(&self, _cfg: &ExperimentConfig) -> String {
        "pass_through".into()
    }

    fn produce(
        &self,
        _cfg: &ExperimentConfig,
        _seeds: &SeedRecord,
        _train: &Dataset,
        _test: &Dataset,
        source: &Dataset,
    ) -> Result<Generated> {
        Ok(Generated {
            samples: source.clone(),
            history: None,
            test_loss: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub first: f64,
    pub last: f64,
    pub history: Vec<f64>,
    pub test: Option<LossBreakdown>,
}

/// One attack run, with enough configuration to repeat it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub dataset: String,
    pub attack: AttackKind,
    pub victim: VictimKind,
    pub generator: String,
    pub auc_before: f64,
    pub auc_after: f64,
    /// `auc_before − auc_after`
    pub delta: f64,
    pub before: AucScore,
    pub after: AucScore,
    pub roc_auc_before: Option<f64>,
    pub roc_auc_after: Option<f64>,
    pub loss: Option<LossSummary>,
    /// Mean of the ε values drawn during training.
    pub epsilon_mean: Option<f64>,
    /// Mean |x′ − x| over the replaced partition.
    pub mean_abs_perturbation: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub smote_applied: bool,
    pub smote_synthetic_rows: usize,
    pub smote_duplicated: bool,
    pub wavelon_form: Option<String>,
    pub seeds: SeedRecord,
    pub config: ExperimentConfig,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub report: AttackReport,
    /// Victim trained on the clean train partition.
    pub victim_before: Victim,
    /// The model scored after the attack: the same victim for evasion, a
    /// freshly retrained one for poisoning.
    pub victim_after: Victim,
    pub generated: Dataset,
}

/// Runs the evasion pipeline regardless of `cfg.attack`.
pub fn run_evasion(cfg: &ExperimentConfig) -> Result<AttackReport> {
    let cfg = ExperimentConfig {
        attack: AttackKind::Evasion,
        ..cfg.clone()
    };
    Ok(run_experiment(&cfg)?.report)
}

/// Runs the poisoning pipeline regardless of `cfg.attack`.
pub fn run_poison(cfg: &ExperimentConfig) -> Result<AttackReport> {
    let cfg = ExperimentConfig {
        attack: AttackKind::Poison,
        ..cfg.clone()
    };
    Ok(run_experiment(&cfg)?.report)
}

/// Loads `cfg.dataset_path` and runs `cfg.attack` with the VAE generator.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AttackOutcome> {
    let start = Instant::now();
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let ds = load_csv(&cfg.dataset_path, cfg.label_column.as_deref()).map_err(|e| e.at_stage("load"))?;
    let mut outcome = run_on_dataset(cfg, &ds, &VaeGenerator)?;
    outcome.report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(outcome)
}

/// Runs `cfg.attack` on an in-memory dataset with any generator.
pub fn run_on_dataset(cfg: &ExperimentConfig, ds: &Dataset, generator: &dyn SampleGenerator) -> Result<AttackOutcome> {
    let start = Instant::now();
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let seeds = SeedRecord::derive(cfg.seed, cfg.chaos_seed);

    let (train, test) = stratified_split(ds, cfg.train_fraction, seeds.split).map_err(|e| e.at_stage("split"))?;
    let scaler = fit_minmax(&train).map_err(|e| e.at_stage("scale"))?;
    let train = apply_minmax(&train, &scaler).map_err(|e| e.at_stage("scale"))?;
    let test = apply_minmax(&test, &scaler).map_err(|e| e.at_stage("scale"))?;

    let smote_applied = cfg.smote.should_apply(&train);
    let (train, synthetic_rows, duplicated) = if smote_applied {
        let out = smote(&train, cfg.smote_k, seeds.smote).map_err(|e| e.at_stage("smote"))?;
        (out.dataset, out.synthetic_rows, out.duplicated)
    } else {
        (train, 0, false)
    };

    let victim_cfg = cfg.victim_config();
    let victim_before = Victim::train(cfg.victim, &train, &victim_cfg).map_err(|e| e.at_stage("victim"))?;
    let before = victim_before.evaluate(&test, cfg.threshold).map_err(|e| e.at_stage("victim"))?;

    let protected = match cfg.attack {
        AttackKind::Evasion => &train,
        AttackKind::Poison => &test,
    };
    let checksum = protected.fingerprint();
    let source = match cfg.attack {
        AttackKind::Evasion => &test,
        AttackKind::Poison => &train,
    };
    let generated = generator
        .produce(cfg, &seeds, &train, &test, source)
        .map_err(|e| e.at_stage("generator"))?;
    let samples = generated.samples;
    if samples.features().shape() != source.features().shape() || samples.labels() != source.labels() {
        return Err(Error::State("generator changed the shape or labels of its source".into()).at_stage("generator"));
    }

    let (victim_after, after) = match cfg.attack {
        AttackKind::Evasion => {
            let after = victim_before.evaluate(&samples, cfg.threshold).map_err(|e| e.at_stage("evaluate"))?;
            (victim_before.clone(), after)
        }
        AttackKind::Poison => {
            let retrained = Victim::train(cfg.victim, &samples, &victim_cfg).map_err(|e| e.at_stage("retrain"))?;
            let after = retrained.evaluate(&test, cfg.threshold).map_err(|e| e.at_stage("evaluate"))?;
            (retrained, after)
        }
    };
    if protected.fingerprint() != checksum {
        return Err(Error::State(format!("{} partition was modified", cfg.attack)).at_stage("evaluate"));
    }

    let diffs = samples.features().as_slice().iter().zip(source.features().as_slice());
    let mean_abs_perturbation = diffs.map(|(a, b)| (a - b).abs()).sum::<f64>() / samples.features().as_slice().len() as f64;
    let epsilon_mean = generated
        .history
        .as_ref()
        .filter(|_| cfg.generator.is_chaotic())
        .map(|h| h.epsilon_mean);
    let loss = generated.history.map(|h| LossSummary {
        first: h.first(),
        last: h.last(),
        history: h.epoch_loss,
        test: generated.test_loss,
    });

    let report = AttackReport {
        dataset: cfg.dataset_id(),
        attack: cfg.attack,
        victim: cfg.victim,
        generator: generator.name(cfg),
        auc_before: before.score.auc,
        auc_after: after.score.auc,
        delta: before.score.auc - after.score.auc,
        before: before.score,
        after: after.score,
        roc_auc_before: before.roc_auc,
        roc_auc_after: after.roc_auc,
        loss,
        epsilon_mean,
        mean_abs_perturbation,
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        smote_applied,
        smote_synthetic_rows: synthetic_rows,
        smote_duplicated: duplicated,
        wavelon_form: cfg.generator.is_wavelet().then(|| WAVELON_FORM.to_string()),
        seeds,
        config: cfg.clone(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok(AttackOutcome {
        report,
        victim_before,
        victim_after,
        generated: samples,
    })
}
