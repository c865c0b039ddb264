use serde::{Deserialize, Serialize};

use super::wavelet::{Activation, WaveletKind};
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};

/// Smallest admissible |dilation|.
pub const MIN_DILATION: f64 = 1e-3;

/// Affine map followed by a pointwise activation: `y = act(W·x + c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// out × in
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// A layer of wavelons. Unit `j` computes `uⱼ = (wⱼ·x − bⱼ) / aⱼ` and emits
/// `f(uⱼ)`, with translation `b` and dilation `a` trained alongside `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletLayer {
    /// out × in
    pub weights: Matrix,
    pub translation: Vec<f64>,
    pub dilation: Vec<f64>,
    pub kind: WaveletKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Dense(DenseLayer),
    Wavelet(WaveletLayer),
}

impl DenseLayer {
    /// Weights and bias drawn from N(0,1).
    pub fn random(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Self {
        Self {
            weights: Matrix::random_normal(outputs, inputs, rng),
            bias: (0..outputs).map(|_| rng.next_normal()).collect(),
            activation,
        }
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(outputs, inputs),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// Returns (pre-activation, activation).
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        let mut pre = x.matmul_t(&self.weights)?;
        for r in 0..pre.rows() {
            for (v, &c) in pre.row_mut(r).iter_mut().zip(&self.bias) {
                *v += c;
            }
        }
        let act = self.activation;
        let out = pre.map(|z| act.eval(z));
        Ok((pre, out))
    }

    /// Returns ([dW, dc], dx).
    pub fn backward(&self, x: &Matrix, pre: &Matrix, upstream: &Matrix) -> Result<(Vec<Vec<f64>>, Matrix)> {
        let act = self.activation;
        let delta = upstream.zip_map(pre, |g, z| g * act.grad(z))?;
        let dw = delta.t_matmul(x)?;
        let db = delta.col_sums();
        let dx = delta.matmul(&self.weights)?;
        Ok((vec![dw.into_vec(), db], dx))
    }
}

impl WaveletLayer {
    /// Weights and translations from N(0,1); dilations from |N(0,1)| + 0.5.
    pub fn random(inputs: usize, outputs: usize, kind: WaveletKind, rng: &mut Rng) -> Self {
        let weights = Matrix::random_normal(outputs, inputs, rng);
        let translation = (0..outputs).map(|_| rng.next_normal()).collect();
        let dilation = (0..outputs).map(|_| rng.next_normal().abs() + 0.5).collect();
        let mut layer = Self {
            weights,
            translation,
            dilation,
            kind,
        };
        layer.clamp_dilation();
        layer
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// Pushes every dilation away from zero to at least [`MIN_DILATION`],
    /// keeping its sign.
    pub fn clamp_dilation(&mut self) {
        for a in &mut self.dilation {
            if a.abs() < MIN_DILATION {
                *a = if *a < 0.0 { -MIN_DILATION } else { MIN_DILATION };
            }
        }
    }

    /// Returns (u, f(u)).
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        let mut u = x.matmul_t(&self.weights)?;
        for r in 0..u.rows() {
            for ((v, &b), &a) in u.row_mut(r).iter_mut().zip(&self.translation).zip(&self.dilation) {
                *v = (*v - b) / a;
            }
        }
        let kind = self.kind;
        let out = u.map(|v| kind.eval(v));
        Ok((u, out))
    }

    /// Returns ([dW, db, da], dx).
    pub fn backward(&self, x: &Matrix, u: &Matrix, upstream: &Matrix) -> Result<(Vec<Vec<f64>>, Matrix)> {
        if upstream.shape() != u.shape() {
            return Err(Error::shape("WaveletLayer::backward", u.shape(), upstream.shape()));
        }
        let out = self.outputs();
        // gradient w.r.t. the weighted sum s = w·x, i.e. δ·f'(u)/a
        let mut ds = Matrix::zeros(u.rows(), out);
        let mut db = vec![0.0; out];
        let mut da = vec![0.0; out];
        for r in 0..u.rows() {
            let u_row = u.row(r);
            let g_row = upstream.row(r);
            let ds_row = ds.row_mut(r);
            for j in 0..out {
                let local = g_row[j] * self.kind.grad(u_row[j]) / self.dilation[j];
                ds_row[j] = local;
                db[j] -= local;
                da[j] -= local * u_row[j];
            }
        }
        let dw = ds.t_matmul(x)?;
        let dx = ds.matmul(&self.weights)?;
        Ok((vec![dw.into_vec(), db, da], dx))
    }
}

impl Layer {
    pub fn inputs(&self) -> usize {
        match self {
            Layer::Dense(l) => l.inputs(),
            Layer::Wavelet(l) => l.inputs(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Layer::Dense(l) => l.outputs(),
            Layer::Wavelet(l) => l.outputs(),
        }
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        if x.cols() != self.inputs() {
            return Err(Error::shape("Layer::forward", x.shape(), (self.outputs(), self.inputs())));
        }
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::Wavelet(l) => l.forward(x),
        }
    }

    pub fn backward(&self, x: &Matrix, pre: &Matrix, upstream: &Matrix) -> Result<(Vec<Vec<f64>>, Matrix)> {
        match self {
            Layer::Dense(l) => l.backward(x, pre, upstream),
            Layer::Wavelet(l) => l.backward(x, pre, upstream),
        }
    }

    /// Parameter tensors in the same order `backward` reports gradients.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Dense(l) => vec![l.weights.as_mut_slice(), &mut l.bias],
            Layer::Wavelet(l) => vec![
                l.weights.as_mut_slice(),
                &mut l.translation,
                &mut l.dilation,
            ],
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Dense(l) => vec![l.weights.as_slice(), &l.bias],
            Layer::Wavelet(l) => vec![l.weights.as_slice(), &l.translation, &l.dilation],
        }
    }

    pub fn enforce_constraints(&mut self) {
        if let Layer::Wavelet(l) = self {
            l.clamp_dilation();
        }
    }
}
