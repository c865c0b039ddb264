//! Python bindings for the `vaeattack` crate.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

use vaeattack::attacks::{run_experiment, AttackReport};
use vaeattack::chaos::LogisticMap;
use vaeattack::config::{parse_config, parse_config_json, parse_config_str, AttackKind, ExperimentConfig};
use vaeattack::dataprep::{apply_minmax, fit_minmax, load_csv, smote, stratified_split, write_csv, Dataset};
use vaeattack::metrics::{self, confusion, roc_auc};
use vaeattack::numkernel::{Matrix, Rng};
use vaeattack::runner::{resolve_out_dir, run_experiments as run_grid};
use vaeattack::synth::{make_synthetic as synth_to_file, synthesize, SynthKind};
use vaeattack::vae::{self, Architecture, NoiseSource, TrainConfig, VaeModel, Variant};
use vaeattack::wavenet::{Activation, OptimizerKind, WaveletKind};

/// Row-major matrix as Python sees it.
type Rows = Vec<Vec<f64>>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn matrix_from(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    Matrix::from_rows(rows).map_err(value_err)
}

/// Feature matrix with 0/1 labels.
#[pyclass(name = "Dataset", module = "vaeattack_py", from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: Dataset,
}

impl From<Dataset> for PyDataset {
    fn from(inner: Dataset) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (features, labels, feature_names = None))]
    fn new(features: Vec<Vec<f64>>, labels: Vec<u8>, feature_names: Option<Vec<String>>) -> PyResult<Self> {
        let x = matrix_from(&features)?;
        let ds = match feature_names {
            Some(names) => Dataset::new(x, labels, names),
            None => Dataset::unnamed(x, labels),
        };
        ds.map(Self::from).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, label_column = None))]
    fn load_csv(path: PathBuf, label_column: Option<String>) -> PyResult<Self> {
        load_csv(path, label_column.as_deref()).map(Self::from).map_err(value_err)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        write_csv(&self.inner, path).map_err(value_err)
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.features())
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    fn class_counts(&self) -> (usize, usize) {
        self.inner.class_counts()
    }

    fn fingerprint(&self) -> u64 {
        self.inner.fingerprint()
    }

    /// Returns `(train, test)`.
    #[pyo3(signature = (train_fraction = 0.7, seed = 0))]
    fn stratified_split(&self, train_fraction: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (a, b) = stratified_split(&self.inner, train_fraction, seed).map_err(value_err)?;
        Ok((a.into(), b.into()))
    }

    /// Fits min–max scaling on `self` and applies it to `self` and `others`.
    #[pyo3(signature = (*others))]
    fn minmax_scale(&self, others: Vec<PyDataset>) -> PyResult<Vec<Self>> {
        let params = fit_minmax(&self.inner).map_err(value_err)?;
        std::iter::once(&self.inner)
            .chain(others.iter().map(|o| &o.inner))
            .map(|d| apply_minmax(d, &params).map(Self::from).map_err(value_err))
            .collect()
    }

    /// Returns `(balanced, synthetic_rows, duplicated)`.
    #[pyo3(signature = (k = 5, seed = 0))]
    fn smote(&self, k: usize, seed: u64) -> PyResult<(Self, usize, bool)> {
        let out = smote(&self.inner, k, seed).map_err(value_err)?;
        Ok((out.dataset.into(), out.synthetic_rows, out.duplicated))
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        let (zeros, ones) = self.inner.class_counts();
        format!(
            "Dataset(rows={}, features={}, negatives={zeros}, positives={ones})",
            self.inner.n_rows(),
            self.inner.n_features()
        )
    }
}

/// Chaotic stream `x ← 4·x·(1−x)` after a burn-in.
#[pyclass(name = "LogisticMap", module = "vaeattack_py")]
pub struct PyLogisticMap {
    inner: LogisticMap,
}

#[pymethods]
impl PyLogisticMap {
    #[new]
    fn new(seed: f64) -> PyResult<Self> {
        LogisticMap::new(seed).map(|inner| Self { inner }).map_err(value_err)
    }

    #[getter]
    fn state(&self) -> f64 {
        self.inner.state()
    }

    fn next_value(&mut self) -> f64 {
        self.inner.next_value()
    }

    fn fill(&mut self, n: usize) -> PyResult<Vec<f64>> {
        self.inner.fill(n).map_err(value_err)
    }
}

/// A generator of one of the four variants, plus the noise stream it was
/// trained with so generation continues that stream.
#[pyclass(name = "VaeModel", module = "vaeattack_py")]
pub struct PyVaeModel {
    model: VaeModel,
    noise: NoiseSource,
}

#[pymethods]
impl PyVaeModel {
    #[new]
    #[pyo3(signature = (variant, features, hidden_layers = vec![16], latent_dim = 2, activation = "relu", wavelet = "morlet", seed = 0, chaos_seed = 0.1234))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        variant: &str,
        features: usize,
        hidden_layers: Vec<usize>,
        latent_dim: usize,
        activation: &str,
        wavelet: &str,
        seed: u64,
        chaos_seed: f64,
    ) -> PyResult<Self> {
        let variant: Variant = parse(variant)?;
        let arch = Architecture {
            features,
            hidden_layers,
            latent_dim,
            activation: parse::<Activation>(activation)?,
            wavelet: parse::<WaveletKind>(wavelet)?,
        };
        let mut rng = Rng::new(seed);
        let model = VaeModel::new(variant, &arch, &mut rng).map_err(value_err)?;
        let noise = if variant.is_chaotic() {
            NoiseSource::chaotic(chaos_seed).map_err(value_err)?
        } else {
            NoiseSource::gaussian(rng.fork().seed())
        };
        Ok(Self { model, noise })
    }

    #[getter]
    fn variant(&self) -> String {
        self.model.variant().to_string()
    }

    /// Trains on the features of `data`; returns the per-epoch loss.
    #[pyo3(signature = (data, epochs = 200, lr = 0.01, momentum = 0.01, optimizer = "adam", batch_size = 64, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        &mut self,
        data: &PyDataset,
        epochs: usize,
        lr: f64,
        momentum: f64,
        optimizer: &str,
        batch_size: usize,
        seed: u64,
    ) -> PyResult<Vec<f64>> {
        let cfg = TrainConfig {
            epochs,
            lr,
            momentum,
            optimizer: parse::<OptimizerKind>(optimizer)?,
            batch_size,
            seed,
        };
        let history = vae::train(&mut self.model, data.inner.features(), &cfg, &mut self.noise)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(history.epoch_loss)
    }

    /// Returns `(mu, logvar)` as row lists.
    fn encode(&self, features: Rows) -> PyResult<(Rows, Rows)> {
        let (mu, lv) = self.model.encode(&matrix_from(&features)?).map_err(value_err)?;
        Ok((rows_of(&mu), rows_of(&lv)))
    }

    /// Returns `(recon, kl, total)` with `z = μ`.
    fn evaluate(&self, data: &PyDataset) -> PyResult<(f64, f64, f64)> {
        let l = self.model.evaluate(data.inner.features()).map_err(value_err)?;
        Ok((l.recon, l.kl, l.total))
    }

    #[pyo3(signature = (source, deterministic_latent = false))]
    fn generate(&mut self, source: &PyDataset, deterministic_latent: bool) -> PyResult<PyDataset> {
        vae::generate(&self.model, &source.inner, &mut self.noise, deterministic_latent)
            .map(PyDataset::from)
            .map_err(value_err)
    }
}

#[pyfunction]
fn wavelet(kind: &str, x: f64) -> PyResult<f64> {
    Ok(parse::<WaveletKind>(kind)?.eval(x))
}

#[pyfunction]
fn wavelet_grad(kind: &str, x: f64) -> PyResult<f64> {
    Ok(parse::<WaveletKind>(kind)?.grad(x))
}

/// Generates a synthetic dataset, writing it to `path` when given.
#[pyfunction]
#[pyo3(signature = (kind, n, f, seed = 0, path = None))]
fn make_synthetic(kind: &str, n: usize, f: usize, seed: u64, path: Option<PathBuf>) -> PyResult<PyDataset> {
    let kind: SynthKind = parse(kind)?;
    let ds = match path {
        Some(p) => synth_to_file(kind, n, f, seed, p),
        None => synthesize(kind, n, f, seed),
    };
    ds.map(PyDataset::from).map_err(value_err)
}

/// Returns `(sensitivity, specificity, auc, degenerate)` at `threshold`.
#[pyfunction]
#[pyo3(signature = (y_true, y_prob, threshold = 0.5))]
fn balanced_auc(y_true: Vec<u8>, y_prob: Vec<f64>, threshold: f64) -> PyResult<(f64, f64, f64, bool)> {
    let s = metrics::balanced_auc(&confusion(&y_true, &y_prob, threshold).map_err(value_err)?);
    Ok((s.sensitivity, s.specificity, s.auc, s.degenerate))
}

#[pyfunction(name = "roc_auc")]
fn py_roc_auc(y_true: Vec<u8>, scores: Vec<f64>) -> PyResult<Option<f64>> {
    roc_auc(&y_true, &scores).map_err(value_err)
}

/// Accepts a TOML string or a dict with the same keys.
fn configs_from(py: Python<'_>, config: &Bound<'_, PyAny>, base_dir: &Path) -> PyResult<Vec<ExperimentConfig>> {
    if let Ok(text) = config.cast::<PyString>() {
        return parse_config_str(text.to_str()?, base_dir).map_err(value_err);
    }
    if let Ok(dict) = config.cast::<PyDict>() {
        let json: String = py.import("json")?.call_method1("dumps", (dict,))?.extract()?;
        return parse_config_json(&json, base_dir).map_err(value_err);
    }
    Err(PyValueError::new_err("config must be a TOML string or a dict"))
}

fn reports_for(py: Python<'_>, configs: Vec<ExperimentConfig>, attack: AttackKind) -> PyResult<Vec<Py<PyAny>>> {
    let loads = py.import("json")?.getattr("loads")?;
    configs
        .into_iter()
        .map(|cfg| {
            let cfg = ExperimentConfig { attack, ..cfg };
            let report: AttackReport = py
                .detach(|| run_experiment(&cfg))
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
                .report;
            let json = serde_json::to_string(&report).map_err(value_err)?;
            Ok(loads.call1((json,))?.unbind())
        })
        .collect()
}

/// Runs the evasion pipeline for every expanded config; returns report dicts.
#[pyfunction]
#[pyo3(signature = (config, base_dir = PathBuf::from(".")))]
fn run_evasion(py: Python<'_>, config: &Bound<'_, PyAny>, base_dir: PathBuf) -> PyResult<Vec<Py<PyAny>>> {
    let configs = configs_from(py, config, &base_dir)?;
    reports_for(py, configs, AttackKind::Evasion)
}

/// Runs the poisoning pipeline for every expanded config; returns report dicts.
#[pyfunction]
#[pyo3(signature = (config, base_dir = PathBuf::from(".")))]
fn run_poison(py: Python<'_>, config: &Bound<'_, PyAny>, base_dir: PathBuf) -> PyResult<Vec<Py<PyAny>>> {
    let configs = configs_from(py, config, &base_dir)?;
    reports_for(py, configs, AttackKind::Poison)
}

/// Runs a config file like the `run` subcommand; returns `(ok, failed)`.
#[pyfunction]
#[pyo3(signature = (config_path, out_dir = None, workers = 1))]
fn run_experiments(py: Python<'_>, config_path: PathBuf, out_dir: Option<PathBuf>, workers: usize) -> PyResult<(usize, usize)> {
    let configs = parse_config(&config_path).map_err(value_err)?;
    let out = resolve_out_dir(out_dir.as_deref(), &configs);
    let summary = py
        .detach(|| run_grid(&configs, &out, workers))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let failed = summary.failures();
    Ok((summary.records.len() - failed, failed))
}

#[pymodule]
pub fn vaeattack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyLogisticMap>()?;
    m.add_class::<PyVaeModel>()?;
    m.add_function(wrap_pyfunction!(wavelet, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_grad, m)?)?;
    m.add_function(wrap_pyfunction!(make_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_auc, m)?)?;
    m.add_function(wrap_pyfunction!(py_roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(run_evasion, m)?)?;
    m.add_function(wrap_pyfunction!(run_poison, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiments, m)?)?;
    Ok(())
}
