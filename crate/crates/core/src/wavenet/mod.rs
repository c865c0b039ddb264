//! Dense and wavelet layers, backpropagation, and optimizers.

mod layers;
mod network;
mod optim;
mod wavelet;

pub use layers::{DenseLayer, Layer, WaveletLayer, MIN_DILATION};
pub use network::{HiddenKind, Network};
pub use optim::{Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, EPSILON};
pub use wavelet::{sigmoid, Activation, WaveletKind, SHANNON_SERIES_RADIUS};
