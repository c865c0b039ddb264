//! Experiment configuration files.
//!
//! A config is TOML. Top-level keys set scalar values; an optional `[grid]`
//! table maps keys to arrays of candidates and expands into the Cartesian
//! product of experiments, with the last grid key varying fastest.
//!
//! ```toml
//! dataset_path = "data/fixture.csv"
//! attack = "evasion"
//! victim = "lr"
//! generator = "vae_wnn"
//!
//! [grid]
//! wavelet = ["morlet", "gaussian"]
//! latent_dim = [2, 4]
//! hidden_layers = [[16], [16, 8]]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::chaos::LogisticMap;
use crate::dataprep::{SmoteMode, DEFAULT_SMOTE_K};
use crate::error::{Error, Result};
use crate::vae::{Architecture, TrainConfig, Variant};
use crate::victims::{DtConfig, LrConfig, VictimConfig, VictimKind};
use crate::wavenet::{Activation, OptimizerKind, WaveletKind};

pub const DEFAULT_CHAOS_SEED: f64 = 0.1234;
pub const DEFAULT_HIDDEN_LAYERS: [usize; 1] = [16];
pub const DEFAULT_LATENT_DIM: usize = 2;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

pub const KEYS: [&str; 26] = [
    "dataset_path",
    "label_column",
    "attack",
    "victim",
    "generator",
    "epochs",
    "hidden_layers",
    "lr",
    "momentum",
    "optimizer",
    "activation",
    "wavelet",
    "latent_dim",
    "batch_size",
    "smote",
    "smote_k",
    "seed",
    "chaos_seed",
    "deterministic_latent",
    "train_fraction",
    "threshold",
    "dt_max_depth",
    "dt_min_samples_split",
    "lr_epochs",
    "lr_rate",
    "output",
];

const REQUIRED: [&str; 4] = ["dataset_path", "attack", "victim", "generator"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Evasion,
    Poison,
}

impl AttackKind {
    pub fn token(self) -> &'static str {
        match self {
            AttackKind::Evasion => "evasion",
            AttackKind::Poison => "poison",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "evasion" => Ok(AttackKind::Evasion),
            "poison" | "data_poison" => Ok(AttackKind::Poison),
            other => Err(format!("unknown attack '{other}' (expected evasion|poison)")),
        }
    }
}

/// One fully resolved experiment.
///
/// `activation` is set only for MLP generators, `wavelet` only for wavelet
/// generators and `chaos_seed` only for chaotic generators; defaults are
/// filled in when the file leaves them out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub label_column: Option<String>,
    pub attack: AttackKind,
    pub victim: VictimKind,
    pub generator: Variant,
    pub epochs: usize,
    pub hidden_layers: Vec<usize>,
    pub lr: f64,
    pub momentum: f64,
    pub optimizer: OptimizerKind,
    pub activation: Option<Activation>,
    pub wavelet: Option<WaveletKind>,
    pub latent_dim: usize,
    pub batch_size: usize,
    pub smote: SmoteMode,
    pub smote_k: usize,
    pub seed: u64,
    pub chaos_seed: Option<f64>,
    pub deterministic_latent: bool,
    pub train_fraction: f64,
    pub threshold: f64,
    pub dt: DtConfig,
    pub lr_victim: LrConfig,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(dataset_path: impl Into<PathBuf>, attack: AttackKind, victim: VictimKind, generator: Variant) -> Self {
        let train = TrainConfig::default();
        Self {
            dataset_path: dataset_path.into(),
            label_column: None,
            attack,
            victim,
            generator,
            epochs: train.epochs,
            hidden_layers: DEFAULT_HIDDEN_LAYERS.to_vec(),
            lr: train.lr,
            momentum: train.momentum,
            optimizer: train.optimizer,
            activation: (!generator.is_wavelet()).then_some(Activation::Relu),
            wavelet: generator.is_wavelet().then_some(WaveletKind::Morlet),
            latent_dim: DEFAULT_LATENT_DIM,
            batch_size: train.batch_size,
            smote: SmoteMode::Auto,
            smote_k: DEFAULT_SMOTE_K,
            seed: 0,
            chaos_seed: generator.is_chaotic().then_some(DEFAULT_CHAOS_SEED),
            deterministic_latent: false,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            threshold: 0.5,
            dt: DtConfig::default(),
            lr_victim: LrConfig::default(),
            output: None,
        }
    }

    /// Switches generator and resets the generator-specific fields to their
    /// defaults.
    pub fn with_generator(mut self, generator: Variant) -> Self {
        self.generator = generator;
        self.activation = (!generator.is_wavelet()).then_some(Activation::Relu);
        self.wavelet = generator.is_wavelet().then_some(WaveletKind::Morlet);
        self.chaos_seed = generator.is_chaotic().then_some(DEFAULT_CHAOS_SEED);
        self
    }

    /// Short dataset identifier: the file stem of `dataset_path`.
    pub fn dataset_id(&self) -> String {
        self.dataset_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.dataset_path.display().to_string())
    }

    pub fn architecture(&self, features: usize) -> Architecture {
        Architecture {
            features,
            hidden_layers: self.hidden_layers.clone(),
            latent_dim: self.latent_dim,
            activation: self.activation.unwrap_or(Activation::Relu),
            wavelet: self.wavelet.unwrap_or(WaveletKind::Morlet),
        }
    }

    /// Generator training settings; `shuffle_seed` drives minibatch order.
    pub fn train_config(&self, shuffle_seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            momentum: self.momentum,
            optimizer: self.optimizer,
            batch_size: self.batch_size,
            seed: shuffle_seed,
        }
    }

    pub fn victim_config(&self) -> VictimConfig {
        VictimConfig {
            lr: self.lr_victim,
            dt: self.dt,
        }
    }

    /// Range and compatibility checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let g = self.generator;
        if self.activation.is_some() && g.is_wavelet() {
            return Err(Error::config("activation", format!("only applies to MLP generators, not {g}")));
        }
        if self.wavelet.is_some() && !g.is_wavelet() {
            return Err(Error::config("wavelet", format!("only applies to wavelet generators, not {g}")));
        }
        if self.chaos_seed.is_some() && !g.is_chaotic() {
            return Err(Error::config("chaos_seed", format!("only applies to chaotic generators, not {g}")));
        }
        if let Some(seed) = self.chaos_seed {
            LogisticMap::new(seed).map_err(|e| Error::config("chaos_seed", e.to_string()))?;
        }
        self.train_config(0).validate()?;
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::config("hidden_layers", "needs at least one layer, all widths >= 1"));
        }
        if self.latent_dim == 0 {
            return Err(Error::config("latent_dim", "must be >= 1"));
        }
        if self.smote_k == 0 {
            return Err(Error::config("smote_k", "must be >= 1"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie in (0,1)"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config("threshold", "must lie in (0,1)"));
        }
        if self.dt.max_depth == 0 {
            return Err(Error::config("dt_max_depth", "must be >= 1"));
        }
        if self.dt.min_samples_split < 2 {
            return Err(Error::config("dt_min_samples_split", "must be >= 2"));
        }
        if !(self.lr_victim.lr > 0.0 && self.lr_victim.lr.is_finite()) {
            return Err(Error::config("lr_rate", "must be > 0"));
        }
        Ok(())
    }
}

/// Reads and expands a config file. A relative `dataset_path` or `output`
/// is resolved against the file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Vec<ExperimentConfig>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    expand(table, base_dir)
}

/// Same grammar as the TOML form, given as a JSON object.
pub fn parse_config_json(text: &str, base_dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let table: Table = serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))?;
    expand(table, base_dir)
}

fn expand(mut table: Table, base_dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let grid = match table.remove("grid") {
        None => Table::new(),
        Some(Value::Table(t)) => t,
        Some(_) => return Err(Error::config("grid", "must be a table")),
    };
    for key in table.keys().chain(grid.keys()) {
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(key.as_str(), "unknown key"));
        }
    }
    let mut axes: Vec<(&String, &Vec<Value>)> = Vec::with_capacity(grid.len());
    for (key, value) in &grid {
        match value {
            Value::Array(values) if !values.is_empty() => axes.push((key, values)),
            _ => return Err(Error::config(key.as_str(), "grid entries must be non-empty arrays")),
        }
        if table.contains_key(key) {
            return Err(Error::config(key.as_str(), "set both at top level and in [grid]"));
        }
    }
    for key in REQUIRED {
        if !table.contains_key(key) && !grid.contains_key(key) {
            return Err(Error::config(key, "missing required key"));
        }
    }

    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut configs = Vec::with_capacity(total);
    for index in 0..total {
        let mut merged = table.clone();
        let mut rem = index;
        for (key, values) in axes.iter().rev() {
            merged.insert((*key).clone(), values[rem % values.len()].clone());
            rem /= values.len();
        }
        configs.push(build(&merged, base_dir)?);
    }
    Ok(configs)
}

fn build(t: &Table, base_dir: &Path) -> Result<ExperimentConfig> {
    let resolve = |p: String| {
        let p = PathBuf::from(p);
        if p.is_relative() {
            base_dir.join(p)
        } else {
            p
        }
    };
    let generator: Variant = parse_token(t, "generator")?.expect("required key");
    let mut cfg = ExperimentConfig::new(
        resolve(get_str(t, "dataset_path")?.expect("required key")),
        parse_token(t, "attack")?.expect("required key"),
        parse_token(t, "victim")?.expect("required key"),
        generator,
    );
    if let Some(v) = get_str(t, "label_column")? {
        cfg.label_column = Some(v);
    }
    if let Some(v) = get_usize(t, "epochs")? {
        cfg.epochs = v;
    }
    if let Some(v) = t.get("hidden_layers") {
        cfg.hidden_layers = parse_widths(v)?;
    }
    if let Some(v) = get_f64(t, "lr")? {
        cfg.lr = v;
    }
    if let Some(v) = get_f64(t, "momentum")? {
        cfg.momentum = v;
    }
    if let Some(v) = parse_token(t, "optimizer")? {
        cfg.optimizer = v;
    }
    if let Some(v) = parse_token::<Activation>(t, "activation")? {
        if generator.is_wavelet() {
            return Err(Error::config("activation", format!("only applies to MLP generators, not {generator}")));
        }
        cfg.activation = Some(v);
    }
    if let Some(v) = parse_token::<WaveletKind>(t, "wavelet")? {
        if !generator.is_wavelet() {
            return Err(Error::config("wavelet", format!("only applies to wavelet generators, not {generator}")));
        }
        cfg.wavelet = Some(v);
    }
    if let Some(v) = get_usize(t, "latent_dim")? {
        cfg.latent_dim = v;
    }
    if let Some(v) = get_usize(t, "batch_size")? {
        cfg.batch_size = v;
    }
    if let Some(v) = t.get("smote") {
        cfg.smote = match v {
            Value::Boolean(true) => SmoteMode::On,
            Value::Boolean(false) => SmoteMode::Off,
            Value::String(s) => s.parse().map_err(|e: String| Error::config("smote", e))?,
            _ => return Err(Error::config("smote", "expected on|off|auto or a boolean")),
        };
    }
    if let Some(v) = get_usize(t, "smote_k")? {
        cfg.smote_k = v;
    }
    if let Some(v) = t.get("seed") {
        cfg.seed = match v {
            Value::Integer(i) if *i >= 0 => *i as u64,
            // seeds above i64::MAX can be given as strings
            Value::String(s) => s.trim().parse().map_err(|_| Error::config("seed", "expected an unsigned integer"))?,
            _ => return Err(Error::config("seed", "expected an unsigned integer")),
        };
    }
    if let Some(v) = get_f64(t, "chaos_seed")? {
        if !generator.is_chaotic() {
            return Err(Error::config("chaos_seed", format!("only applies to chaotic generators, not {generator}")));
        }
        cfg.chaos_seed = Some(v);
    }
    if let Some(v) = t.get("deterministic_latent") {
        cfg.deterministic_latent = v
            .as_bool()
            .ok_or_else(|| Error::config("deterministic_latent", "expected a boolean"))?;
    }
    if let Some(v) = get_f64(t, "train_fraction")? {
        cfg.train_fraction = v;
    }
    if let Some(v) = get_f64(t, "threshold")? {
        cfg.threshold = v;
    }
    if let Some(v) = get_usize(t, "dt_max_depth")? {
        cfg.dt.max_depth = v;
    }
    if let Some(v) = get_usize(t, "dt_min_samples_split")? {
        cfg.dt.min_samples_split = v;
    }
    if let Some(v) = get_usize(t, "lr_epochs")? {
        cfg.lr_victim.epochs = v;
    }
    if let Some(v) = get_f64(t, "lr_rate")? {
        cfg.lr_victim.lr = v;
    }
    if let Some(v) = get_str(t, "output")? {
        cfg.output = Some(resolve(v));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn get_str(t: &Table, key: &str) -> Result<Option<String>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(Error::config(key, "expected a string")),
    }
}

fn get_f64(t: &Table, key: &str) -> Result<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(f)) => Ok(Some(*f)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(Error::config(key, "expected a number")),
    }
}

fn get_usize(t: &Table, key: &str) -> Result<Option<usize>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(_) => Err(Error::config(key, "expected a non-negative integer")),
    }
}

fn parse_token<T: FromStr<Err = String>>(t: &Table, key: &str) -> Result<Option<T>> {
    get_str(t, key)?
        .map(|s| s.parse::<T>().map_err(|e| Error::config(key, e)))
        .transpose()
}

fn parse_widths(v: &Value) -> Result<Vec<usize>> {
    let bad = || Error::config("hidden_layers", "expected an array of positive integers");
    let Value::Array(items) = v else {
        return Err(bad());
    };
    items
        .iter()
        .map(|item| match item {
            Value::Integer(i) if *i > 0 => Ok(*i as usize),
            _ => Err(bad()),
        })
        .collect()
}
