//! Victim classifiers: logistic regression and a Gini CART tree.

mod logistic;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use logistic::{train_lr, LogisticModel, LrConfig, GRAD_TOLERANCE};
pub use tree::{best_split, gini, train_dt, DtConfig, SplitChoice, TreeNode};

use crate::dataprep::Dataset;
use crate::error::Result;
use crate::metrics::{balanced_auc, confusion, confusion_from_labels, roc_auc, AucScore, ConfusionMatrix};
use crate::numkernel::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VictimKind {
    Lr,
    Dt,
}

impl VictimKind {
    pub fn token(self) -> &'static str {
        match self {
            VictimKind::Lr => "lr",
            VictimKind::Dt => "dt",
        }
    }
}

impl fmt::Display for VictimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for VictimKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(VictimKind::Lr),
            "dt" => Ok(VictimKind::Dt),
            other => Err(format!("unknown victim '{other}' (expected lr|dt)")),
        }
    }
}

/// Hyperparameters for both victim kinds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VictimConfig {
    pub lr: LrConfig,
    pub dt: DtConfig,
}

/// A trained victim of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Victim {
    Lr(LogisticModel),
    Dt(TreeNode),
}

impl Victim {
    /// Trains a fresh model; nothing carries over between calls.
    pub fn train(kind: VictimKind, ds: &Dataset, cfg: &VictimConfig) -> Result<Victim> {
        Ok(match kind {
            VictimKind::Lr => Victim::Lr(train_lr(ds, &cfg.lr)?),
            VictimKind::Dt => Victim::Dt(train_dt(ds, &cfg.dt)?),
        })
    }

    pub fn kind(&self) -> VictimKind {
        match self {
            Victim::Lr(_) => VictimKind::Lr,
            Victim::Dt(_) => VictimKind::Dt,
        }
    }

    /// Class-1 scores per row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            Victim::Lr(m) => m.predict_proba(x),
            Victim::Dt(t) => Ok(t.predict(x)?.1),
        }
    }

    /// Hard labels. Logistic regression predicts 1 when `p >= threshold`;
    /// a tree uses its leaf label, which breaks a 50/50 leaf toward 0.
    pub fn predict_labels(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        match self {
            Victim::Lr(m) => Ok(m
                .predict_proba(x)?
                .into_iter()
                .map(|p| u8::from(p >= threshold))
                .collect()),
            Victim::Dt(t) => Ok(t.predict(x)?.0),
        }
    }

    pub fn evaluate(&self, ds: &Dataset, threshold: f64) -> Result<Evaluation> {
        let scores = self.predict_proba(ds.features())?;
        let confusion = match self {
            Victim::Lr(_) => confusion(ds.labels(), &scores, threshold)?,
            Victim::Dt(t) => confusion_from_labels(ds.labels(), &t.predict(ds.features())?.0)?,
        };
        Ok(Evaluation {
            confusion,
            score: balanced_auc(&confusion),
            roc_auc: roc_auc(ds.labels(), &scores)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub score: AucScore,
    pub roc_auc: Option<f64>,
}
