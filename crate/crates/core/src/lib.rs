//! Adversarial sample generation for tabular classifiers with wavelet and
//! chaotic variational autoencoders, plus the evasion and data-poisoning
//! pipelines that measure their effect on simple victim models.

pub mod attacks;
pub mod chaos;
pub mod config;
pub mod dataprep;
pub mod error;
pub mod metrics;
pub mod numkernel;
pub mod runner;
pub mod synth;
pub mod vae;
pub mod victims;
pub mod wavenet;

pub use error::{Error, Result};
