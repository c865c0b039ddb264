use serde::{Deserialize, Serialize};

use crate::dataprep::Dataset;
use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::wavenet::sigmoid;

/// Probabilities are kept this far from 0 and 1.
const PROB_FLOOR: f64 = 1e-15;

/// Full-batch training stops once every gradient component is below this.
pub const GRAD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub epochs: usize,
    pub lr: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self { epochs: 500, lr: 0.1 }
    }
}

impl LogisticModel {
    pub fn zeros(features: usize) -> Self {
        Self {
            weights: vec![0.0; features],
            bias: 0.0,
        }
    }

    fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.weights.len() {
            return Err(Error::shape("predict_proba_lr", x.shape(), (1, self.weights.len())));
        }
        Ok(x.iter_rows()
            .map(|row| row.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias)
            .collect())
    }

    /// `σ(w·x + b)` per row, strictly inside (0,1).
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .logits(x)?
            .into_iter()
            .map(|z| sigmoid(z).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
            .collect())
    }

    /// Mean binary cross-entropy on `ds`.
    pub fn loss(&self, ds: &Dataset) -> Result<f64> {
        let logits = self.logits(ds.features())?;
        let n = logits.len().max(1) as f64;
        // log(1 + e^z) − y·z, computed stably
        Ok(logits
            .iter()
            .zip(ds.labels())
            .map(|(&z, &y)| softplus(z) - f64::from(y) * z)
            .sum::<f64>()
            / n)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Gradient descent on mean cross-entropy from zero parameters.
pub fn train_lr(ds: &Dataset, cfg: &LrConfig) -> Result<LogisticModel> {
    ds.require_both_classes().map_err(|e| Error::Training {
        epoch: 0,
        reason: e.to_string(),
    })?;
    let f = ds.n_features();
    let n = ds.n_rows() as f64;
    let mut model = LogisticModel::zeros(f);
    let x = ds.features();
    for _ in 0..cfg.epochs {
        let logits = model.logits(x)?;
        let mut gw = vec![0.0; f];
        let mut gb = 0.0;
        for ((row, &z), &y) in x.iter_rows().zip(&logits).zip(ds.labels()) {
            let err = sigmoid(z) - f64::from(y);
            for (g, &v) in gw.iter_mut().zip(row) {
                *g += err * v;
            }
            gb += err;
        }
        gw.iter_mut().for_each(|g| *g /= n);
        gb /= n;
        let norm = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if norm < GRAD_TOLERANCE {
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= cfg.lr * g;
        }
        model.bias -= cfg.lr * gb;
    }
    Ok(model)
}
