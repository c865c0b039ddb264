//! Tabular datasets and the preprocessing spine: CSV ingestion, stratified
//! splitting, min–max scaling and SMOTE oversampling.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};

/// Feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::shape("Dataset::new", features.shape(), (labels.len(), 1)));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::shape("Dataset::new", features.shape(), (1, feature_names.len())));
        }
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Label {
                row,
                value: labels[row].to_string(),
            });
        }
        if !features.all_finite() {
            return Err(Error::Numeric("dataset contains non-finite features".into()));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Dataset with generated column names `f0, f1, …`.
    pub fn unnamed(features: Matrix, labels: Vec<u8>) -> Result<Self> {
        let names = (0..features.cols()).map(|i| format!("f{i}")).collect();
        Self::new(features, labels, names)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// (count of label 0, count of label 1)
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same labels and names, new feature values.
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        if features.shape() != self.features.shape() {
            return Err(Error::shape("Dataset::with_features", self.features.shape(), features.shape()));
        }
        Dataset::new(features, self.labels.clone(), self.feature_names.clone())
    }

    /// Hash over feature bits and labels; used to prove a partition was not
    /// modified.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.features.shape().hash(&mut h);
        for v in self.features.as_slice() {
            v.to_bits().hash(&mut h);
        }
        self.labels.hash(&mut h);
        h.finish()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        let (zeros, ones) = self.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::Stratification(format!(
                "need both classes present, have {zeros} negatives and {ones} positives"
            )));
        }
        Ok(())
    }
}

/// Reads a headed, comma-separated numeric file. The label column is the
/// last one unless `label_column` names another.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Format(format!("{} has no header row", path.as_ref().display())));
    }
    let label_idx = match label_column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("label column '{name}' not found in header")))?,
        None => headers.len() - 1,
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        // data rows are numbered from 1, matching a spreadsheet view without the header
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::Format(format!(
                "row {row} has {} cells, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                let v: f64 = cell.parse().map_err(|_| Error::Label {
                    row,
                    value: cell.to_string(),
                })?;
                labels.push(match v {
                    0.0 => 0,
                    1.0 => 1,
                    _ => {
                        return Err(Error::Label {
                            row,
                            value: cell.to_string(),
                        })
                    }
                });
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: headers[c].clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: headers[c].clone(),
                        value: cell.to_string(),
                    });
                }
                values.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Format(format!("{} has no data rows", path.as_ref().display())));
    }
    let features = Matrix::new(labels.len(), feature_names.len(), values)?;
    Dataset::new(features, labels, feature_names)
}

/// Writes features then a `label` column. Floats use the shortest
/// representation that reads back to the same bits.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    write_records(ds, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub(crate) fn write_records<W: std::io::Write>(ds: &Dataset, writer: &mut csv::Writer<W>) -> Result<()> {
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push("label");
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(ds.n_features() + 1);
    for (row, &label) in ds.features.iter_rows().zip(&ds.labels) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(label.to_string());
        writer.write_record(&record)?;
    }
    Ok(())
}

/// Slack added to `count × fraction` before flooring.
pub const SPLIT_ROUNDING: f64 = 1e-9;

/// Splits each class separately: `floor(count × train_fraction)` rows of
/// that class go to train, the rest to test. Both outputs keep the original
/// row order. The product is nudged by [`SPLIT_ROUNDING`] before flooring
/// so `360 × 0.7` counts as 252 rather than 251.99999999999997.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!("train fraction {train_fraction} not in (0,1)")));
    }
    let (zeros, ones) = ds.class_counts();
    if zeros < 2 || ones < 2 {
        return Err(Error::Stratification(format!(
            "each class needs at least 2 rows, have {zeros} negatives and {ones} positives"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..ds.n_rows()).filter(|&i| ds.labels[i] == class).collect();
        rng.shuffle(&mut members);
        let take = (members.len() as f64 * train_fraction + SPLIT_ROUNDING).floor() as usize;
        train_idx.extend_from_slice(&members[..take]);
        test_idx.extend_from_slice(&members[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((ds.select(&train_idx), ds.select(&test_idx)))
}

/// Per-column extrema fitted on a training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(train: &Dataset) -> Result<ScalerParams> {
    if train.n_rows() == 0 {
        return Err(Error::Domain("cannot fit a scaler on zero rows".into()));
    }
    let f = train.n_features();
    let mut min = vec![f64::INFINITY; f];
    let mut max = vec![f64::NEG_INFINITY; f];
    for row in train.features.iter_rows() {
        for j in 0..f {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    Ok(ScalerParams { min, max })
}

/// `(x − min)/(max − min)`, clamped to [0,1]; constant columns map to 0.
pub fn apply_minmax(ds: &Dataset, params: &ScalerParams) -> Result<Dataset> {
    if params.min.len() != ds.n_features() {
        return Err(Error::shape("apply_minmax", ds.features.shape(), (1, params.min.len())));
    }
    let mut features = ds.features.clone();
    for r in 0..features.rows() {
        for (j, v) in features.row_mut(r).iter_mut().enumerate() {
            let (lo, hi) = (params.min[j], params.max[j]);
            *v = if hi > lo { ((*v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        }
    }
    ds.with_features(features)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoteMode {
    On,
    Off,
    /// Oversample when minority/majority < [`AUTO_SMOTE_RATIO`].
    Auto,
}

pub const AUTO_SMOTE_RATIO: f64 = 0.8;

impl SmoteMode {
    pub fn token(self) -> &'static str {
        match self {
            SmoteMode::On => "on",
            SmoteMode::Off => "off",
            SmoteMode::Auto => "auto",
        }
    }

    pub fn should_apply(self, ds: &Dataset) -> bool {
        match self {
            SmoteMode::On => true,
            SmoteMode::Off => false,
            SmoteMode::Auto => {
                let (a, b) = ds.class_counts();
                let (minority, majority) = (a.min(b), a.max(b));
                majority > 0 && (minority as f64) / (majority as f64) < AUTO_SMOTE_RATIO
            }
        }
    }
}

impl fmt::Display for SmoteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SmoteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "true" => Ok(SmoteMode::On),
            "off" | "false" => Ok(SmoteMode::Off),
            "auto" => Ok(SmoteMode::Auto),
            other => Err(format!("unknown smote mode '{other}' (expected on|off|auto)")),
        }
    }
}

pub const DEFAULT_SMOTE_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutcome {
    pub dataset: Dataset,
    pub synthetic_rows: usize,
    /// Set when the minority class had a single row and was duplicated
    /// instead of interpolated.
    pub duplicated: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `rows`) of the `k` nearest rows to `rows[target]`,
/// excluding itself, ties broken by lower index.
fn nearest_neighbors(features: &Matrix, rows: &[usize], target: usize, k: usize) -> Vec<usize> {
    let origin = features.row(rows[target]);
    let mut dists: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(i, &r)| (squared_distance(origin, features.row(r)), i))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Oversamples the minority class up to the majority count. Each synthetic
/// row is `x + δ·(x_nn − x)` for a random minority row `x`, one of its `k`
/// nearest minority neighbors `x_nn`, and `δ ~ U(0,1)`. Originals are kept
/// and synthetic rows are appended.
pub fn smote(ds: &Dataset, k: usize, seed: u64) -> Result<SmoteOutcome> {
    if k == 0 {
        return Err(Error::Domain("smote needs k >= 1".into()));
    }
    ds.require_both_classes()?;
    let (zeros, ones) = ds.class_counts();
    if zeros == ones {
        return Ok(SmoteOutcome {
            dataset: ds.clone(),
            synthetic_rows: 0,
            duplicated: false,
        });
    }
    let minority_label = if ones < zeros { 1u8 } else { 0u8 };
    let minority: Vec<usize> = (0..ds.n_rows()).filter(|&i| ds.labels[i] == minority_label).collect();
    let needed = zeros.max(ones) - minority.len();
    let mut rng = Rng::new(seed);
    let f = ds.n_features();
    let mut synthetic = Vec::with_capacity(needed * f);

    let duplicated = minority.len() == 1;
    if duplicated {
        log::warn!("SMOTE: single minority row, duplicating instead of interpolating");
        for _ in 0..needed {
            synthetic.extend_from_slice(ds.features.row(minority[0]));
        }
    } else {
        let k_eff = k.min(minority.len() - 1);
        let neighbors: Vec<Vec<usize>> = (0..minority.len())
            .map(|i| nearest_neighbors(&ds.features, &minority, i, k_eff))
            .collect();
        for _ in 0..needed {
            let i = rng.next_below(minority.len());
            let nn = neighbors[i][rng.next_below(neighbors[i].len())];
            let delta = rng.next_f64();
            let x = ds.features.row(minority[i]);
            let y = ds.features.row(minority[nn]);
            synthetic.extend(x.iter().zip(y).map(|(a, b)| a + delta * (b - a)));
        }
    }
    let extra = Matrix::new(needed, f, synthetic)?;
    let features = ds.features.vstack(&extra)?;
    let mut labels = ds.labels.clone();
    labels.extend(std::iter::repeat_n(minority_label, needed));
    Ok(SmoteOutcome {
        dataset: Dataset::new(features, labels, ds.feature_names.clone())?,
        synthetic_rows: needed,
        duplicated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn labelled(labels: &[u8]) -> Dataset {
        let features = Matrix::from_fn(labels.len(), 2, |i, j| (i * 2 + j) as f64);
        Dataset::unnamed(features, labels.to_vec()).unwrap()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_small_file() {
        let f = write_tmp("a,b,y\n1,2,0\n3.5,4,1\n-1,0,0\n");
        let ds = load_csv(f.path(), None).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.features().row(1), &[3.5, 4.0]);
    }

    #[test]
    fn named_label_column() {
        let f = write_tmp("y,a,b\n1,2,3\n0,4,5\n");
        let ds = load_csv(f.path(), Some("y")).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.features().row(0), &[2.0, 3.0]);
        assert!(matches!(load_csv(f.path(), Some("nope")), Err(Error::Format(_))));
    }

    #[test]
    fn parse_error_names_cell() {
        let f = write_tmp("a,b,y\n1,2,0\n3,abc,1\n");
        match load_csv(f.path(), None) {
            Err(Error::Parse { row, column, value }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "b", "abc"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_and_empty_errors() {
        let f = write_tmp("a,y\n1,2\n");
        assert!(matches!(load_csv(f.path(), None), Err(Error::Label { row: 1, .. })));
        let f = write_tmp("");
        assert!(matches!(load_csv(f.path(), None), Err(Error::Format(_))));
        let f = write_tmp("a,y\n");
        assert!(matches!(load_csv(f.path(), None), Err(Error::Format(_))));
    }

    #[test]
    fn split_exact_counts() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 10 < 3)).collect();
        let (train, test) = stratified_split(&labelled(&labels), 0.7, 1).unwrap();
        assert_eq!((train.n_rows(), train.class_counts().1), (70, 21));
        assert_eq!((test.n_rows(), test.class_counts().1), (30, 9));
    }

    #[test]
    fn split_floor_rule() {
        let labels = [1, 0, 0, 1, 0, 0, 1, 0, 0, 0];
        let (train, test) = stratified_split(&labelled(&labels), 0.7, 9).unwrap();
        assert_eq!(train.class_counts(), (4, 2));
        assert_eq!(test.class_counts(), (3, 1));
    }

    #[test]
    fn split_floor_is_not_fooled_by_rounding() {
        let labels: Vec<u8> = (0..400).map(|i| u8::from(i < 40)).collect();
        let (train, _) = stratified_split(&labelled(&labels), 0.7, 1).unwrap();
        assert_eq!(train.class_counts(), (252, 28));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let ds = labelled(&labels);
        let a = stratified_split(&ds, 0.6, 5).unwrap();
        let b = stratified_split(&ds, 0.6, 5).unwrap();
        assert_eq!(a, b);
        // features encode the row index in column 0
        let mut seen: Vec<usize> = a
            .0
            .features()
            .iter_rows()
            .chain(a.1.features().iter_rows())
            .map(|r| r[0] as usize / 2)
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_single_class() {
        assert!(matches!(
            stratified_split(&labelled(&[0, 0, 0, 0]), 0.7, 1),
            Err(Error::Stratification(_))
        ));
        assert!(stratified_split(&labelled(&[0, 1, 0, 1]), 1.0, 1).is_err());
    }

    #[test]
    fn minmax_cases() {
        let train = Dataset::unnamed(
            Matrix::from_rows(&[[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]]).unwrap(),
            vec![0, 1, 0],
        )
        .unwrap();
        let p = fit_minmax(&train).unwrap();
        let scaled = apply_minmax(&train, &p).unwrap();
        assert_eq!(scaled.features().as_slice(), &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
        let test = Dataset::unnamed(Matrix::from_rows(&[[8.0, 1.0], [-3.0, 9.0]]).unwrap(), vec![1, 0]).unwrap();
        let scaled = apply_minmax(&test, &p).unwrap();
        assert_eq!(scaled.features().as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn smote_balances() {
        let mut rng = Rng::new(4);
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i >= 90)).collect();
        let ds = Dataset::unnamed(Matrix::random_normal(100, 3, &mut rng), labels).unwrap();
        let out = smote(&ds, 5, 2).unwrap();
        assert_eq!(out.dataset.class_counts(), (90, 90));
        assert_eq!(out.synthetic_rows, 80);
        assert!(!out.duplicated);
        // originals untouched, in place
        assert_eq!(out.dataset.select(&(0..100).collect::<Vec<_>>()), ds);
    }

    #[test]
    fn smote_noop_when_balanced() {
        let ds = labelled(&[0, 1, 1, 0]);
        let out = smote(&ds, 5, 1).unwrap();
        assert_eq!(out.dataset, ds);
        assert_eq!(out.synthetic_rows, 0);
    }

    #[test]
    fn smote_single_minority_duplicates() {
        let ds = labelled(&[0, 0, 0, 1]);
        let out = smote(&ds, 5, 1).unwrap();
        assert!(out.duplicated);
        assert_eq!(out.dataset.class_counts(), (3, 3));
        for r in 4..6 {
            assert_eq!(out.dataset.features().row(r), ds.features().row(3));
        }
    }

    #[test]
    fn smote_mode_auto_threshold() {
        assert!(!SmoteMode::Auto.should_apply(&labelled(&[0, 0, 0, 0, 0, 1, 1, 1, 1])));
        assert!(SmoteMode::Auto.should_apply(&labelled(&[0, 0, 0, 0, 0, 0, 1, 1, 1])));
        assert!(SmoteMode::On.should_apply(&labelled(&[0, 1])));
        assert!(!SmoteMode::Off.should_apply(&labelled(&[0, 0, 0, 1])));
    }

    #[test]
    fn fingerprint_detects_changes() {
        let ds = labelled(&[0, 1, 0]);
        let mut f = ds.features().clone();
        f.set(1, 1, f.get(1, 1) + 1e-12);
        assert_ne!(ds.fingerprint(), ds.with_features(f).unwrap().fingerprint());
        assert_eq!(ds.fingerprint(), ds.clone().fingerprint());
    }
}
