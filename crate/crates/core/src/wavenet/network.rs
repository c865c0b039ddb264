use serde::{Deserialize, Serialize};

use super::layers::{DenseLayer, Layer, WaveletLayer};
use super::wavelet::{Activation, WaveletKind};
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};

#[derive(Debug, Clone)]
struct LayerCache {
    input: Matrix,
    pre: Matrix,
}

/// How each hidden unit transforms its weighted input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenKind {
    Dense(Activation),
    Wavelet(WaveletKind),
}

/// A feed-forward stack of dense and wavelet layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Layer>,
    #[serde(skip)]
    cache: Option<Vec<LayerCache>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::shape(
                    "Network::new",
                    (pair[0].outputs(), pair[0].inputs()),
                    (pair[1].outputs(), pair[1].inputs()),
                ));
            }
        }
        Ok(Self { layers, cache: None })
    }

    /// Builds `inputs → widths[0] → … → widths[last]`, every layer of the
    /// same hidden kind.
    pub fn stack(inputs: usize, widths: &[usize], kind: HiddenKind, rng: &mut Rng) -> Self {
        let mut layers = Vec::with_capacity(widths.len());
        let mut fan_in = inputs;
        for &w in widths {
            layers.push(match kind {
                HiddenKind::Dense(act) => Layer::Dense(DenseLayer::random(fan_in, w, act, rng)),
                HiddenKind::Wavelet(k) => Layer::Wavelet(WaveletLayer::random(fan_in, w, k, rng)),
            });
            fan_in = w;
        }
        Self { layers, cache: None }
    }

    pub fn push(&mut self, layer: Layer) -> Result<()> {
        if let Some(last) = self.layers.last() {
            if last.outputs() != layer.inputs() {
                return Err(Error::shape(
                    "Network::push",
                    (last.outputs(), last.inputs()),
                    (layer.outputs(), layer.inputs()),
                ));
            }
        }
        self.layers.push(layer);
        self.cache = None;
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        self.cache = None;
        &mut self.layers
    }

    pub fn input_width(&self) -> Option<usize> {
        self.layers.first().map(Layer::inputs)
    }

    pub fn output_width(&self) -> Option<usize> {
        self.layers.last().map(Layer::outputs)
    }

    /// Forward pass that keeps per-layer inputs and pre-activations for
    /// [`backward`](Self::backward).
    pub fn forward(&mut self, batch: &Matrix) -> Result<Matrix> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (pre, out) = layer.forward(&x)?;
            caches.push(LayerCache { input: x, pre });
            x = out;
        }
        self.cache = Some(caches);
        Ok(x)
    }

    /// Forward pass without touching the cache.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        let mut x = batch.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?.1;
        }
        Ok(x)
    }

    /// Backpropagates `upstream = ∂L/∂output` through the cached pass.
    /// Returns parameter gradients in [`params_mut`](Self::params_mut)
    /// order, plus the gradient with respect to the network input.
    pub fn backward(&self, upstream: &Matrix) -> Result<(Vec<Vec<f64>>, Matrix)> {
        let caches = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called without a cached forward pass".into()))?;
        let mut per_layer = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for (layer, cache) in self.layers.iter().zip(caches).rev() {
            let (grads, dx) = layer.backward(&cache.input, &cache.pre, &g)?;
            per_layer.push(grads);
            g = dx;
        }
        per_layer.reverse();
        Ok((per_layer.into_iter().flatten().collect(), g))
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn enforce_constraints(&mut self) {
        for layer in &mut self.layers {
            layer.enforce_constraints();
        }
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_is_idempotent_and_matches_predict() {
        let mut rng = Rng::new(8);
        let mut net = Network::stack(4, &[6, 3], HiddenKind::Wavelet(WaveletKind::Morlet), &mut rng);
        let x = Matrix::random_normal(5, 4, &mut rng);
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, net.predict(&x).unwrap());
    }

    #[test]
    fn backward_without_forward_is_a_state_error() {
        let mut rng = Rng::new(8);
        let net = Network::stack(2, &[2], HiddenKind::Dense(Activation::Tanh), &mut rng);
        assert!(matches!(net.backward(&Matrix::zeros(1, 2)), Err(Error::State(_))));
    }

    #[test]
    fn mismatched_layers_rejected() {
        let mut rng = Rng::new(1);
        let a = Layer::Dense(DenseLayer::random(3, 4, Activation::Relu, &mut rng));
        let b = Layer::Dense(DenseLayer::random(5, 2, Activation::Relu, &mut rng));
        assert!(Network::new(vec![a, b]).is_err());
    }

    #[test]
    fn wrong_batch_width_rejected() {
        let mut rng = Rng::new(1);
        let mut net = Network::stack(3, &[2], HiddenKind::Dense(Activation::Relu), &mut rng);
        assert!(net.forward(&Matrix::zeros(2, 4)).is_err());
    }
}
