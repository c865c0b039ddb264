use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Below this distance from the Shannon singularity the closed form is
/// replaced by its Taylor series.
pub const SHANNON_SERIES_RADIUS: f64 = 1e-4;

/// `2/√3 · π^(-1/4)`, the Mexican-hat normalization.
fn mexican_hat_scale() -> f64 {
    2.0 / 3f64.sqrt() * PI.powf(-0.25)
}

/// Mother wavelets usable as wavelon activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletKind {
    /// `cos(1.75x)·exp(−x²/2)`
    Morlet,
    /// `exp(−x²)`
    Gaussian,
    /// `2/√3 · π^(−1/4) · (1 − x²) · exp(−x²/2)`
    MexicanHat,
    /// `(sin π(x−½) − sin 2π(x−½)) / π(x−½)`
    Shannon,
    /// `sin 3x + sin 0.3x + sin 0.03x`
    Ggw,
}

impl WaveletKind {
    pub const ALL: [WaveletKind; 5] = [
        WaveletKind::Morlet,
        WaveletKind::Gaussian,
        WaveletKind::MexicanHat,
        WaveletKind::Shannon,
        WaveletKind::Ggw,
    ];

    pub fn token(self) -> &'static str {
        match self {
            WaveletKind::Morlet => "morlet",
            WaveletKind::Gaussian => "gaussian",
            WaveletKind::MexicanHat => "mexican_hat",
            WaveletKind::Shannon => "shannon",
            WaveletKind::Ggw => "ggw",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            WaveletKind::Morlet => (1.75 * x).cos() * (-0.5 * x * x).exp(),
            WaveletKind::Gaussian => (-x * x).exp(),
            WaveletKind::MexicanHat => mexican_hat_scale() * (1.0 - x * x) * (-0.5 * x * x).exp(),
            WaveletKind::Shannon => {
                let t = x - 0.5;
                if t.abs() < SHANNON_SERIES_RADIUS {
                    shannon_series(t)
                } else {
                    shannon_direct(t)
                }
            }
            WaveletKind::Ggw => (3.0 * x).sin() + (0.3 * x).sin() + (0.03 * x).sin(),
        }
    }

    /// Analytic derivative of [`eval`](Self::eval).
    pub fn grad(self, x: f64) -> f64 {
        match self {
            WaveletKind::Morlet => {
                let g = (-0.5 * x * x).exp();
                -g * (1.75 * (1.75 * x).sin() + x * (1.75 * x).cos())
            }
            WaveletKind::Gaussian => -2.0 * x * (-x * x).exp(),
            WaveletKind::MexicanHat => {
                mexican_hat_scale() * x * (x * x - 3.0) * (-0.5 * x * x).exp()
            }
            WaveletKind::Shannon => {
                let t = x - 0.5;
                if t.abs() < SHANNON_SERIES_RADIUS {
                    let p2 = PI * PI;
                    7.0 * p2 / 3.0 * t - 31.0 * p2 * p2 / 30.0 * t * t * t
                } else {
                    let num = (PI * t).sin() - (2.0 * PI * t).sin();
                    let dnum = PI * (PI * t).cos() - 2.0 * PI * (2.0 * PI * t).cos();
                    dnum / (PI * t) - num / (PI * t * t)
                }
            }
            WaveletKind::Ggw => {
                3.0 * (3.0 * x).cos() + 0.3 * (0.3 * x).cos() + 0.03 * (0.03 * x).cos()
            }
        }
    }
}

#[inline]
fn shannon_direct(t: f64) -> f64 {
    ((PI * t).sin() - (2.0 * PI * t).sin()) / (PI * t)
}

#[inline]
fn shannon_series(t: f64) -> f64 {
    let p2 = PI * PI;
    let t2 = t * t;
    -1.0 + 7.0 * p2 / 6.0 * t2 - 31.0 * p2 * p2 / 120.0 * t2 * t2
}

impl fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for WaveletKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "morlet" => Ok(WaveletKind::Morlet),
            "gaussian" => Ok(WaveletKind::Gaussian),
            "mexican_hat" => Ok(WaveletKind::MexicanHat),
            "shannon" => Ok(WaveletKind::Shannon),
            "ggw" => Ok(WaveletKind::Ggw),
            other => Err(format!(
                "unknown wavelet '{other}' (expected morlet|gaussian|mexican_hat|shannon|ggw)"
            )),
        }
    }
}

/// Pointwise activations for dense layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn token(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    #[inline]
    pub fn grad(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(format!(
                "unknown activation '{other}' (expected relu|tanh|sigmoid|identity)"
            )),
        }
    }
}

/// Logistic function, evaluated without overflow for large |z|.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
