//! Confusion counts, the sensitivity/specificity mean reported as "AUC",
//! and a rank-based ROC AUC kept for diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Predicts 1 when `probability >= threshold`.
pub fn confusion(y_true: &[u8], y_prob: &[f64], threshold: f64) -> Result<ConfusionMatrix> {
    if y_true.len() != y_prob.len() {
        return Err(Error::shape("confusion", (y_true.len(), 1), (y_prob.len(), 1)));
    }
    let preds: Vec<u8> = y_prob.iter().map(|&p| u8::from(p >= threshold)).collect();
    confusion_from_labels(y_true, &preds)
}

pub fn confusion_from_labels(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::shape("confusion", (y_true.len(), 1), (y_pred.len(), 1)));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (1, _) => cm.fn_ += 1,
            (_, 1) => cm.fp += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucScore {
    pub sensitivity: f64,
    pub specificity: f64,
    /// `(sensitivity + specificity) / 2`
    pub auc: f64,
    /// True when a class was absent and its rate was taken as 0.
    pub degenerate: bool,
}

/// Mean of sensitivity `TP/(TP+FN)` and specificity `TN/(TN+FP)`. A rate
/// with a zero denominator counts as 0 and sets `degenerate`.
pub fn balanced_auc(cm: &ConfusionMatrix) -> AucScore {
    let rate = |num: usize, den: usize| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let sens = rate(cm.tp, cm.tp + cm.fn_);
    let spec = rate(cm.tn, cm.tn + cm.fp);
    let sensitivity = sens.unwrap_or(0.0);
    let specificity = spec.unwrap_or(0.0);
    AucScore {
        sensitivity,
        specificity,
        auc: (sensitivity + specificity) / 2.0,
        degenerate: sens.is_none() || spec.is_none(),
    }
}

/// Area under the ROC curve via the Mann–Whitney statistic, ties counted
/// as one half. `None` when either class is missing.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<Option<f64>> {
    if y_true.len() != scores.len() {
        return Err(Error::shape("roc_auc", (y_true.len(), 1), (scores.len(), 1)));
    }
    let mut pairs: Vec<(f64, u8)> = scores.iter().copied().zip(y_true.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = pairs.iter().filter(|p| p.1 == 1).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }
    // sum of midranks of the positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].0 == pairs[i].0 {
            j += 1;
        }
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid_rank * pairs[i..=j].iter().filter(|p| p.1 == 1).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok(Some((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64)))
}
