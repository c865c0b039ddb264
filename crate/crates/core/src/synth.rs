//! Two-class Gaussian fixtures standing in for real tabular datasets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataprep::{write_csv, Dataset};
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};

/// Per-feature distance between the class means, in standard deviations.
pub const CLASS_SEPARATION: f64 = 2.0;

pub const MIN_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Equal class sizes.
    SeparableGaussians,
    /// Nine negatives for every positive.
    ImbalancedGaussians,
}

impl SynthKind {
    pub fn token(self) -> &'static str {
        match self {
            SynthKind::SeparableGaussians => "separable_gaussians",
            SynthKind::ImbalancedGaussians => "imbalanced_gaussians",
        }
    }

    fn positives(self, n: usize) -> usize {
        match self {
            SynthKind::SeparableGaussians => n / 2,
            SynthKind::ImbalancedGaussians => (n as f64 / 10.0).round() as usize,
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "separable_gaussians" => Ok(SynthKind::SeparableGaussians),
            "imbalanced_gaussians" => Ok(SynthKind::ImbalancedGaussians),
            other => Err(format!(
                "unknown synthetic kind '{other}' (expected separable_gaussians|imbalanced_gaussians)"
            )),
        }
    }
}

/// Class 0 is drawn from N(0, I) and class 1 from N(2·1, I) in `f`
/// dimensions; rows come out in shuffled order.
pub fn synthesize(kind: SynthKind, n: usize, f: usize, seed: u64) -> Result<Dataset> {
    if n < MIN_ROWS {
        return Err(Error::Domain(format!("synthetic datasets need n >= {MIN_ROWS}, got {n}")));
    }
    if f == 0 {
        return Err(Error::Domain("synthetic datasets need f >= 1".into()));
    }
    let mut rng = Rng::new(seed);
    let positives = kind.positives(n);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < positives)).collect();
    rng.shuffle(&mut labels);
    let features = Matrix::from_fn(n, f, |i, _| {
        let shift = if labels[i] == 1 { CLASS_SEPARATION } else { 0.0 };
        shift + rng.next_normal()
    });
    Dataset::unnamed(features, labels)
}

pub fn make_synthetic(kind: SynthKind, n: usize, f: usize, seed: u64, path: impl AsRef<Path>) -> Result<Dataset> {
    let ds = synthesize(kind, n, f, seed)?;
    if let Some(dir) = path.as_ref().parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&ds, path)?;
    Ok(ds)
}
