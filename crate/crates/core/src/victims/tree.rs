use serde::{Deserialize, Serialize};

use crate::dataprep::Dataset;
use crate::error::{Error, Result};
use crate::numkernel::Matrix;

/// `1 − p₀² − p₁²`
pub fn gini(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Domain("gini of an empty label set".into()));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    Ok(gini_counts(labels.len() - ones, ones))
}

#[inline]
pub(crate) fn gini_counts(zeros: usize, ones: usize) -> f64 {
    let n = (zeros + ones) as f64;
    let p0 = zeros as f64 / n;
    let p1 = ones as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for DtConfig {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: u8,
        /// Fraction of class-1 rows that reached this leaf.
        probability: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Weighted impurity decrease achieved by this split.
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// Best threshold split of a node, by weighted Gini decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn leaf_for(labels: &[u8], rows: &[usize]) -> TreeNode {
    let ones = rows.iter().filter(|&&r| labels[r] == 1).count();
    let probability = ones as f64 / rows.len() as f64;
    TreeNode::Leaf {
        label: u8::from(probability > 0.5),
        probability,
    }
}

/// Gains closer than this count as tied; equal partitions reached through
/// different summation orders differ in the last bits.
const GAIN_TIE: f64 = 1e-12;

/// Scans every feature and every midpoint between consecutive distinct
/// values. A candidate replaces the incumbent only when its gain is larger
/// by more than [`GAIN_TIE`], so ties go to the lowest feature index and
/// then the lowest threshold.
pub fn best_split(x: &Matrix, labels: &[u8], rows: &[usize]) -> Option<SplitChoice> {
    let n = rows.len();
    let total_ones = rows.iter().filter(|&&r| labels[r] == 1).count();
    let parent = gini_counts(n - total_ones, total_ones);
    let mut best: Option<SplitChoice> = None;
    let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(n);
    for feature in 0..x.cols() {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x.get(r, feature), labels[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_ones = 0usize;
        for i in 0..n - 1 {
            left_ones += usize::from(sorted[i].1);
            if sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let left_n = i + 1;
            let right_n = n - left_n;
            let right_ones = total_ones - left_ones;
            let weighted = (left_n as f64 * gini_counts(left_n - left_ones, left_ones)
                + right_n as f64 * gini_counts(right_n - right_ones, right_ones))
                / n as f64;
            let gain = parent - weighted;
            if best.is_none_or(|b| gain > b.gain + GAIN_TIE) {
                best = Some(SplitChoice {
                    feature,
                    threshold: 0.5 * (sorted[i].0 + sorted[i + 1].0),
                    gain,
                });
            }
        }
    }
    best
}

/// CART classification tree grown greedily on Gini impurity.
pub fn train_dt(ds: &Dataset, cfg: &DtConfig) -> Result<TreeNode> {
    if cfg.max_depth == 0 {
        return Err(Error::config("dt_max_depth", "must be >= 1"));
    }
    ds.require_both_classes()?;
    let rows: Vec<usize> = (0..ds.n_rows()).collect();
    Ok(grow(ds.features(), ds.labels(), &rows, 0, cfg))
}

fn grow(x: &Matrix, labels: &[u8], rows: &[usize], depth: usize, cfg: &DtConfig) -> TreeNode {
    let ones = rows.iter().filter(|&&r| labels[r] == 1).count();
    let pure = ones == 0 || ones == rows.len();
    if pure || depth >= cfg.max_depth || rows.len() < cfg.min_samples_split.max(2) {
        return leaf_for(labels, rows);
    }
    let Some(choice) = best_split(x, labels, rows) else {
        return leaf_for(labels, rows);
    };
    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x.get(r, choice.feature) <= choice.threshold);
    TreeNode::Split {
        feature: choice.feature,
        threshold: choice.threshold,
        gain: choice.gain,
        left: Box::new(grow(x, labels, &left, depth + 1, cfg)),
        right: Box::new(grow(x, labels, &right, depth + 1, cfg)),
    }
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, left, right, .. } => {
                [Some(*feature), left.max_feature(), right.max_feature()].into_iter().flatten().max()
            }
        }
    }

    fn route(&self, row: &[f64]) -> (u8, f64) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { label, probability } => return (*label, *probability),
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Labels and class-1 fractions; a value equal to a threshold goes left.
    pub fn predict(&self, x: &Matrix) -> Result<(Vec<u8>, Vec<f64>)> {
        if let Some(f) = self.max_feature() {
            if f >= x.cols() {
                return Err(Error::shape("predict_dt", x.shape(), (x.rows(), f + 1)));
            }
        }
        Ok(x.iter_rows().map(|r| self.route(r)).unzip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Rng;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[1, 1, 1]).unwrap(), 0.0);
        assert_eq!(gini(&[0, 1, 1, 0]).unwrap(), 0.5);
        assert!((gini(&[0, 0, 0, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini(&[]).is_err());
    }

    #[test]
    fn single_perfect_split() {
        let x = Matrix::from_rows(&[[0.1, 0.9], [0.2, 0.1], [0.8, 0.5], [0.9, 0.3]]).unwrap();
        let ds = Dataset::unnamed(x, vec![0, 0, 1, 1]).unwrap();
        let tree = train_dt(&ds, &DtConfig::default()).unwrap();
        assert_eq!(tree.depth(), 1);
        let (labels, _) = tree.predict(ds.features()).unwrap();
        assert_eq!(labels, ds.labels());
        match tree {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!((threshold - 0.5).abs() < 1e-15);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn constant_features_make_a_leaf() {
        let ds = Dataset::unnamed(Matrix::from_fn(5, 2, |_, _| 0.3), vec![0, 1, 1, 0, 1]).unwrap();
        let tree = train_dt(&ds, &DtConfig::default()).unwrap();
        assert_eq!(tree, TreeNode::Leaf { label: 1, probability: 0.6 });
        let (labels, probs) = tree.predict(&Matrix::from_fn(3, 2, |i, _| i as f64)).unwrap();
        assert_eq!(labels, vec![1, 1, 1]);
        assert_eq!(probs, vec![0.6; 3]);
    }

    #[test]
    fn tie_on_threshold_goes_left() {
        let tree = TreeNode::Split {
            feature: 0,
            threshold: 0.5,
            gain: 0.5,
            left: Box::new(TreeNode::Leaf { label: 0, probability: 0.0 }),
            right: Box::new(TreeNode::Leaf { label: 1, probability: 1.0 }),
        };
        let (labels, _) = tree.predict(&Matrix::new(2, 1, vec![0.5, 0.5000001]).unwrap()).unwrap();
        assert_eq!(labels, vec![0, 1]);
    }

    #[test]
    fn even_leaf_predicts_zero() {
        let ds = Dataset::unnamed(Matrix::zeros(4, 1), vec![0, 1, 1, 0]).unwrap();
        assert_eq!(train_dt(&ds, &DtConfig::default()).unwrap(), TreeNode::Leaf { label: 0, probability: 0.5 });
    }

    #[test]
    fn fully_grown_tree_memorizes() {
        let mut rng = Rng::new(12);
        let x = Matrix::from_fn(60, 3, |_, _| rng.next_f64());
        let labels = (0..60).map(|_| u8::from(rng.next_f64() < 0.4)).collect();
        let ds = Dataset::unnamed(x, labels).unwrap();
        let tree = train_dt(&ds, &DtConfig { max_depth: 64, min_samples_split: 2 }).unwrap();
        assert_eq!(tree.predict(ds.features()).unwrap().0, ds.labels());
    }

    #[test]
    fn depth_limit_respected() {
        let mut rng = Rng::new(13);
        let x = Matrix::from_fn(200, 4, |_, _| rng.next_f64());
        let labels = (0..200).map(|_| u8::from(rng.next_f64() < 0.5)).collect();
        let ds = Dataset::unnamed(x, labels).unwrap();
        for d in 1..5 {
            let tree = train_dt(&ds, &DtConfig { max_depth: d, min_samples_split: 2 }).unwrap();
            assert!(tree.depth() <= d);
        }
        assert!(train_dt(&ds, &DtConfig { max_depth: 0, min_samples_split: 2 }).is_err());
    }

    #[test]
    fn predict_rejects_narrow_input() {
        let tree = TreeNode::Split {
            feature: 2,
            threshold: 0.0,
            gain: 0.1,
            left: Box::new(TreeNode::Leaf { label: 0, probability: 0.0 }),
            right: Box::new(TreeNode::Leaf { label: 1, probability: 1.0 }),
        };
        assert!(tree.predict(&Matrix::zeros(1, 2)).is_err());
    }
}
