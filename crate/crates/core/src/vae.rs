//! Variational autoencoders with MLP or wavelet encoder/decoder stacks and
//! Gaussian or logistic-map latent noise.
//!
//! The training objective is the negative evidence lower bound,
//! `recon + kl`, where `recon` is the per-row squared reconstruction error
//! and `kl` the closed-form divergence of `N(μ, σ²)` from `N(0, I)`, both
//! averaged over the batch. The encoder emits `log σ²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chaos::LogisticMap;
use crate::dataprep::Dataset;
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};
use crate::wavenet::{
    Activation, DenseLayer, HiddenKind, Layer, Network, Optimizer, OptimizerKind, WaveletKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "vae_mlp")]
    VaeMlp,
    #[serde(rename = "vae_wnn")]
    VaeWnn,
    #[serde(rename = "cvae_mlp")]
    CvaeMlp,
    #[serde(rename = "cvae_wnn")]
    CvaeWnn,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::VaeMlp, Variant::VaeWnn, Variant::CvaeMlp, Variant::CvaeWnn];

    pub fn token(self) -> &'static str {
        match self {
            Variant::VaeMlp => "vae_mlp",
            Variant::VaeWnn => "vae_wnn",
            Variant::CvaeMlp => "cvae_mlp",
            Variant::CvaeWnn => "cvae_wnn",
        }
    }

    pub fn is_chaotic(self) -> bool {
        matches!(self, Variant::CvaeMlp | Variant::CvaeWnn)
    }

    pub fn is_wavelet(self) -> bool {
        matches!(self, Variant::VaeWnn | Variant::CvaeWnn)
    }

    pub fn noise_kind(self) -> NoiseKind {
        if self.is_chaotic() {
            NoiseKind::Chaotic
        } else {
            NoiseKind::Gaussian
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vae_mlp" => Ok(Variant::VaeMlp),
            "vae_wnn" => Ok(Variant::VaeWnn),
            "cvae_mlp" => Ok(Variant::CvaeMlp),
            "cvae_wnn" => Ok(Variant::CvaeWnn),
            other => Err(format!(
                "unknown generator '{other}' (expected vae_mlp|vae_wnn|cvae_mlp|cvae_wnn)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Chaotic,
}

/// Where the reparameterization ε comes from.
#[derive(Debug, Clone)]
pub enum NoiseSource {
    Gaussian(Rng),
    Chaotic(LogisticMap),
}

impl NoiseSource {
    pub fn gaussian(seed: u64) -> Self {
        NoiseSource::Gaussian(Rng::new(seed))
    }

    pub fn chaotic(seed: f64) -> Result<Self> {
        Ok(NoiseSource::Chaotic(LogisticMap::new(seed)?))
    }

    pub fn kind(&self) -> NoiseKind {
        match self {
            NoiseSource::Gaussian(_) => NoiseKind::Gaussian,
            NoiseSource::Chaotic(_) => NoiseKind::Chaotic,
        }
    }

    /// A `rows × cols` block of ε, filled row-major from the stream.
    pub fn draw(&mut self, rows: usize, cols: usize) -> Matrix {
        let values = match self {
            NoiseSource::Gaussian(rng) => (0..rows * cols).map(|_| rng.next_normal()).collect(),
            NoiseSource::Chaotic(map) => map.by_ref().take(rows * cols).collect(),
        };
        Matrix::new(rows, cols, values).expect("length matches by construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub recon: f64,
    pub kl: f64,
    pub total: f64,
}

/// `z = μ + exp(½·logvar) ⊙ ε`
pub fn reparameterize(mu: &Matrix, logvar: &Matrix, eps: &Matrix) -> Result<Matrix> {
    if mu.shape() != logvar.shape() {
        return Err(Error::shape("reparameterize", mu.shape(), logvar.shape()));
    }
    if mu.shape() != eps.shape() {
        return Err(Error::shape("reparameterize", mu.shape(), eps.shape()));
    }
    let scaled = logvar.zip_map(eps, |lv, e| (0.5 * lv).exp() * e)?;
    mu.zip_map(&scaled, |m, s| m + s)
}

/// Batch-mean squared reconstruction error plus batch-mean Gaussian KL.
pub fn vae_loss(x: &Matrix, x_hat: &Matrix, mu: &Matrix, logvar: &Matrix) -> Result<LossBreakdown> {
    if x.shape() != x_hat.shape() {
        return Err(Error::shape("vae_loss", x.shape(), x_hat.shape()));
    }
    if mu.shape() != logvar.shape() {
        return Err(Error::shape("vae_loss", mu.shape(), logvar.shape()));
    }
    if !(x.all_finite() && x_hat.all_finite() && mu.all_finite() && logvar.all_finite()) {
        return Err(Error::Numeric("non-finite input to vae_loss".into()));
    }
    let batch = x.rows().max(1) as f64;
    let recon: f64 = x
        .as_slice()
        .iter()
        .zip(x_hat.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / batch;
    let kl_sum: f64 = mu
        .as_slice()
        .iter()
        .zip(logvar.as_slice())
        .map(|(&m, &lv)| kl_term(m, lv))
        .sum();
    let kl = (kl_sum / mu.rows().max(1) as f64).max(0.0);
    let total = recon + kl;
    if !total.is_finite() {
        return Err(Error::Numeric("vae_loss overflowed".into()));
    }
    Ok(LossBreakdown { recon, kl, total })
}

/// `−½(1 + lv − μ² − e^lv)`. Nonnegative since `e^t ≥ 1 + t`; written as
/// `½μ² + ½(e^lv − 1 − lv)` to keep it so under rounding.
#[inline]
fn kl_term(mu: f64, logvar: f64) -> f64 {
    0.5 * mu * mu + 0.5 * (logvar.exp_m1() - logvar).max(0.0)
}

/// Encoder/decoder shape of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub features: usize,
    pub hidden_layers: Vec<usize>,
    pub latent_dim: usize,
    /// Used by the MLP variants.
    pub activation: Activation,
    /// Used by the wavelet variants.
    pub wavelet: WaveletKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeModel {
    variant: Variant,
    latent_dim: usize,
    features: usize,
    encoder: Network,
    mu_head: DenseLayer,
    logvar_head: DenseLayer,
    decoder: Network,
}

/// Intermediate values of one cached training pass.
#[derive(Debug, Clone)]
struct PassCache {
    hidden: Matrix,
    mu: Matrix,
    logvar: Matrix,
    eps: Matrix,
}

/// Values produced by a forward pass with an explicit ε.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub mu: Matrix,
    pub logvar: Matrix,
    pub z: Matrix,
    pub x_hat: Matrix,
}

impl VaeModel {
    /// Randomly initialized model. Hidden layers are dense with `activation`
    /// for the MLP variants and wavelons of kind `wavelet` otherwise; the
    /// decoder mirrors the encoder widths and ends in a sigmoid layer.
    pub fn new(variant: Variant, arch: &Architecture, rng: &mut Rng) -> Result<Self> {
        if arch.features == 0 || arch.latent_dim == 0 || arch.hidden_layers.contains(&0) {
            return Err(Error::Domain("layer widths must be positive".into()));
        }
        let hidden = if variant.is_wavelet() {
            HiddenKind::Wavelet(arch.wavelet)
        } else {
            HiddenKind::Dense(arch.activation)
        };
        let encoder = Network::stack(arch.features, &arch.hidden_layers, hidden, rng);
        let enc_out = arch.hidden_layers.last().copied().unwrap_or(arch.features);
        let mu_head = DenseLayer::random(enc_out, arch.latent_dim, Activation::Identity, rng);
        let logvar_head = DenseLayer::random(enc_out, arch.latent_dim, Activation::Identity, rng);
        let mirrored: Vec<usize> = arch.hidden_layers.iter().rev().copied().collect();
        let mut decoder = Network::stack(arch.latent_dim, &mirrored, hidden, rng);
        let dec_in = mirrored.last().copied().unwrap_or(arch.latent_dim);
        decoder.push(Layer::Dense(DenseLayer::random(dec_in, arch.features, Activation::Sigmoid, rng)))?;
        Ok(Self {
            variant,
            latent_dim: arch.latent_dim,
            features: arch.features,
            encoder,
            mu_head,
            logvar_head,
            decoder,
        })
    }

    /// Assembles a model from explicit parts, checking that widths chain.
    pub fn from_parts(
        variant: Variant,
        encoder: Network,
        mu_head: DenseLayer,
        logvar_head: DenseLayer,
        decoder: Network,
    ) -> Result<Self> {
        let latent_dim = mu_head.outputs();
        let features = decoder
            .output_width()
            .ok_or_else(|| Error::Domain("decoder has no layers".into()))?;
        let enc_in = encoder.input_width().unwrap_or(mu_head.inputs());
        let enc_out = encoder.output_width().unwrap_or(enc_in);
        if enc_in != features {
            return Err(Error::shape("VaeModel::from_parts", (enc_in, 1), (features, 1)));
        }
        for head in [&mu_head, &logvar_head] {
            if head.inputs() != enc_out || head.outputs() != latent_dim {
                return Err(Error::shape(
                    "VaeModel::from_parts",
                    (latent_dim, enc_out),
                    (head.outputs(), head.inputs()),
                ));
            }
        }
        if decoder.input_width() != Some(latent_dim) {
            return Err(Error::shape(
                "VaeModel::from_parts",
                (latent_dim, 1),
                (decoder.input_width().unwrap_or(0), 1),
            ));
        }
        Ok(Self {
            variant,
            latent_dim,
            features,
            encoder,
            mu_head,
            logvar_head,
            decoder,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.variant.noise_kind()
    }

    pub fn encoder(&self) -> &Network {
        &self.encoder
    }

    pub fn decoder(&self) -> &Network {
        &self.decoder
    }

    pub fn heads_mut(&mut self) -> (&mut DenseLayer, &mut DenseLayer) {
        (&mut self.mu_head, &mut self.logvar_head)
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.features || x.rows() == 0 {
            return Err(Error::shape("VaeModel", x.shape(), (x.rows().max(1), self.features)));
        }
        Ok(())
    }

    /// Posterior mean and log-variance per row.
    pub fn encode(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        self.check_input(x)?;
        let h = self.encoder.predict(x)?;
        let mu = self.mu_head.forward(&h)?.1;
        let logvar = self.logvar_head.forward(&h)?.1;
        Ok((mu, logvar))
    }

    pub fn decode(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.latent_dim {
            return Err(Error::shape("VaeModel::decode", z.shape(), (z.rows(), self.latent_dim)));
        }
        self.decoder.predict(z)
    }

    /// Full pass with a caller-supplied ε. Does not touch any cache.
    pub fn forward_with_noise(&self, x: &Matrix, eps: &Matrix) -> Result<ForwardOutput> {
        let (mu, logvar) = self.encode(x)?;
        let z = reparameterize(&mu, &logvar, eps)?;
        let x_hat = self.decode(&z)?;
        Ok(ForwardOutput { mu, logvar, z, x_hat })
    }

    /// Loss at `x` with the given ε, plus gradients of `total` for every
    /// parameter in [`params_mut`](Self::params_mut) order.
    pub fn loss_and_grads(&mut self, x: &Matrix, eps: &Matrix) -> Result<(LossBreakdown, Vec<Vec<f64>>)> {
        self.check_input(x)?;
        let hidden = self.encoder.forward(x)?;
        let (mu_pre, mu) = self.mu_head.forward(&hidden)?;
        let (lv_pre, logvar) = self.logvar_head.forward(&hidden)?;
        let z = reparameterize(&mu, &logvar, eps)?;
        let x_hat = self.decoder.forward(&z)?;
        let loss = vae_loss(x, &x_hat, &mu, &logvar)?;
        let cache = PassCache { hidden, mu, logvar, eps: eps.clone() };

        let batch = x.rows() as f64;
        let g_xhat = x_hat.zip_map(x, |xh, xv| 2.0 * (xh - xv) / batch)?;
        let (dec_grads, g_z) = self.decoder.backward(&g_xhat)?;

        let mut g_mu = Matrix::zeros(cache.mu.rows(), self.latent_dim);
        let mut g_lv = Matrix::zeros(cache.mu.rows(), self.latent_dim);
        for i in 0..g_mu.rows() {
            for j in 0..self.latent_dim {
                let m = cache.mu.get(i, j);
                let lv = cache.logvar.get(i, j);
                let gz = g_z.get(i, j);
                let sigma = (0.5 * lv).exp();
                g_mu.set(i, j, gz + m / batch);
                g_lv.set(i, j, gz * 0.5 * sigma * cache.eps.get(i, j) + 0.5 * lv.exp_m1() / batch);
            }
        }
        let (mu_grads, g_h_mu) = self.mu_head.backward(&cache.hidden, &mu_pre, &g_mu)?;
        let (lv_grads, g_h_lv) = self.logvar_head.backward(&cache.hidden, &lv_pre, &g_lv)?;
        let g_hidden = g_h_mu.zip_map(&g_h_lv, |a, b| a + b)?;
        let (enc_grads, _) = self.encoder.backward(&g_hidden)?;

        let mut grads = enc_grads;
        grads.extend(mu_grads);
        grads.extend(lv_grads);
        grads.extend(dec_grads);
        Ok((loss, grads))
    }

    /// Parameter tensors: encoder, μ head, log-variance head, decoder.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut params = self.encoder.params_mut();
        params.push(self.mu_head.weights.as_mut_slice());
        params.push(&mut self.mu_head.bias);
        params.push(self.logvar_head.weights.as_mut_slice());
        params.push(&mut self.logvar_head.bias);
        params.extend(self.decoder.params_mut());
        params
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut params = self.encoder.params();
        params.push(self.mu_head.weights.as_slice());
        params.push(&self.mu_head.bias);
        params.push(self.logvar_head.weights.as_slice());
        params.push(&self.logvar_head.bias);
        params.extend(self.decoder.params());
        params
    }

    pub fn enforce_constraints(&mut self) {
        self.encoder.enforce_constraints();
        self.decoder.enforce_constraints();
    }

    /// Loss with `z = μ`, i.e. without sampling. Used to score held-out data.
    pub fn evaluate(&self, x: &Matrix) -> Result<LossBreakdown> {
        let (mu, logvar) = self.encode(x)?;
        let x_hat = self.decode(&mu)?;
        vae_loss(x, &x_hat, &mu, &logvar)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    /// Drives minibatch shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.01,
            momentum: 0.01,
            optimizer: OptimizerKind::Adam,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be >= 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        if !(self.momentum.is_finite() && self.momentum >= 0.0) {
            return Err(Error::config("momentum", "must be >= 0"));
        }
        Ok(())
    }
}

/// Per-epoch mean total loss, plus summary statistics of the ε consumed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
    pub epsilon_mean: f64,
    pub epsilon_count: u64,
}

impl TrainHistory {
    pub fn first(&self) -> f64 {
        self.epoch_loss.first().copied().unwrap_or(f64::NAN)
    }

    pub fn last(&self) -> f64 {
        self.epoch_loss.last().copied().unwrap_or(f64::NAN)
    }
}

/// Minibatch training: each epoch shuffles the rows, and each batch draws
/// fresh ε from `noise`, computes the loss and takes one optimizer step.
pub fn train(model: &mut VaeModel, x_train: &Matrix, cfg: &TrainConfig, noise: &mut NoiseSource) -> Result<TrainHistory> {
    cfg.validate()?;
    if noise.kind() != model.noise_kind() {
        return Err(Error::State(format!(
            "{} expects {:?} noise, got {:?}",
            model.variant(),
            model.noise_kind(),
            noise.kind()
        )));
    }
    model.check_input(x_train)?;
    let n = x_train.rows();
    let mut shuffle_rng = Rng::new(cfg.seed);
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.lr, cfg.momentum);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainHistory::default();
    let mut eps_sum = 0.0;

    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = x_train.select_rows(chunk);
            let eps = noise.draw(chunk.len(), model.latent_dim());
            eps_sum += eps.as_slice().iter().sum::<f64>();
            history.epsilon_count += eps.as_slice().len() as u64;
            let (loss, grads) = model.loss_and_grads(&batch, &eps).map_err(|e| match e {
                Error::Numeric(reason) => Error::Training { epoch, reason },
                other => other,
            })?;
            if grads.iter().flatten().any(|g| !g.is_finite()) {
                return Err(Error::Training {
                    epoch,
                    reason: "non-finite gradient".into(),
                });
            }
            optimizer.step(model.params_mut(), &grads)?;
            model.enforce_constraints();
            weighted += loss.total * chunk.len() as f64;
        }
        let epoch_loss = weighted / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Training {
                epoch,
                reason: "non-finite epoch loss".into(),
            });
        }
        history.epoch_loss.push(epoch_loss);
    }
    model.encoder.clear_cache();
    model.decoder.clear_cache();
    history.epsilon_mean = if history.epsilon_count > 0 {
        eps_sum / history.epsilon_count as f64
    } else {
        f64::NAN
    };
    Ok(history)
}

/// Encodes each source row, samples `z` with fresh ε (or takes `z = μ` when
/// `deterministic_latent`), and decodes. Labels and row order are kept.
pub fn generate(model: &VaeModel, source: &Dataset, noise: &mut NoiseSource, deterministic_latent: bool) -> Result<Dataset> {
    let x = source.features();
    let (mu, logvar) = model.encode(x)?;
    let z = if deterministic_latent {
        mu
    } else {
        let eps = noise.draw(x.rows(), model.latent_dim());
        reparameterize(&mu, &logvar, &eps)?
    };
    let x_hat = model.decode(&z)?;
    source.with_features(x_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::finite_diff;

    fn arch(features: usize, hidden: &[usize], latent: usize) -> Architecture {
        Architecture {
            features,
            hidden_layers: hidden.to_vec(),
            latent_dim: latent,
            activation: Activation::Tanh,
            wavelet: WaveletKind::Morlet,
        }
    }

    #[test]
    fn reparameterize_cases() {
        let m = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
        assert_eq!(reparameterize(&m(0.0), &m(0.0), &m(0.37)).unwrap().get(0, 0), 0.37);
        let z = reparameterize(&m(1.0), &m(2.0 * 2f64.ln()), &m(0.5)).unwrap().get(0, 0);
        assert!((z - 2.0).abs() < 1e-15);
        let z = reparameterize(&m(0.8), &m(-60.0), &m(1.0)).unwrap().get(0, 0);
        assert!((z - 0.8).abs() < 1e-12);
        assert!(reparameterize(&m(0.0), &Matrix::zeros(1, 2), &m(0.0)).is_err());
    }

    #[test]
    fn loss_cases() {
        let x = Matrix::new(2, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let zeros = Matrix::zeros(2, 2);
        let l = vae_loss(&x, &x, &zeros, &zeros).unwrap();
        assert_eq!((l.recon, l.kl, l.total), (0.0, 0.0, 0.0));

        let mu = Matrix::new(1, 1, vec![1.0]).unwrap();
        let lv = Matrix::zeros(1, 1);
        let one = Matrix::new(1, 1, vec![0.5]).unwrap();
        assert!((vae_loss(&one, &one, &mu, &lv).unwrap().kl - 0.5).abs() < 1e-15);

        let bad = Matrix::new(1, 1, vec![f64::NAN]).unwrap();
        assert!(matches!(vae_loss(&one, &bad, &mu, &lv), Err(Error::Numeric(_))));
    }

    #[test]
    fn recon_is_batch_mean_of_row_sums() {
        let x = Matrix::new(2, 2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let xh = Matrix::new(2, 2, vec![0.5, 0.5, 1.0, 0.0]).unwrap();
        let z = Matrix::zeros(2, 1);
        // rows: 0.25+0.25, 0+1 → mean 0.75
        assert!((vae_loss(&x, &xh, &z, &z).unwrap().recon - 0.75).abs() < 1e-15);
    }

    #[test]
    fn fresh_model_shapes() {
        let mut rng = Rng::new(1);
        for v in Variant::ALL {
            let model = VaeModel::new(v, &arch(6, &[5, 4], 2), &mut rng).unwrap();
            let x = Matrix::from_fn(7, 6, |i, j| ((i * 6 + j) as f64 * 0.013).fract());
            let (mu, lv) = model.encode(&x).unwrap();
            assert_eq!(mu.shape(), (7, 2));
            assert_eq!(lv.shape(), (7, 2));
            assert!(mu.all_finite() && lv.all_finite());
            let out = model.decode(&mu).unwrap();
            assert!(out.as_slice().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn zero_heads_give_prior() {
        let mut rng = Rng::new(2);
        let mut model = VaeModel::new(Variant::VaeWnn, &arch(4, &[3], 2), &mut rng).unwrap();
        let (mu_head, lv_head) = model.heads_mut();
        *mu_head = DenseLayer::zeros(3, 2, Activation::Identity);
        *lv_head = DenseLayer::zeros(3, 2, Activation::Identity);
        let x = Matrix::random_normal(5, 4, &mut rng);
        let (mu, lv) = model.encode(&x).unwrap();
        assert!(mu.as_slice().iter().chain(lv.as_slice()).all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_rows_encode_identically() {
        let mut rng = Rng::new(3);
        let model = VaeModel::new(Variant::CvaeWnn, &arch(3, &[4], 2), &mut rng).unwrap();
        let x = Matrix::from_rows(&[[0.2, 0.4, 0.9], [0.2, 0.4, 0.9]]).unwrap();
        let (mu, _) = model.encode(&x).unwrap();
        assert_eq!(mu.row(0), mu.row(1));
    }

    #[test]
    fn encode_rejects_wrong_width() {
        let mut rng = Rng::new(3);
        let model = VaeModel::new(Variant::VaeMlp, &arch(3, &[4], 2), &mut rng).unwrap();
        assert!(matches!(model.encode(&Matrix::zeros(2, 4)), Err(Error::Shape { .. })));
    }

    #[test]
    fn full_model_gradients_match_finite_differences() {
        let mut rng = Rng::new(99);
        for v in Variant::ALL {
            let mut model = VaeModel::new(v, &arch(4, &[5, 3], 2), &mut rng).unwrap();
            let x = Matrix::from_fn(3, 4, |_, _| rng.next_f64());
            let eps = Matrix::random_normal(3, 2, &mut rng);
            let (_, grads) = model.loss_and_grads(&x, &eps).unwrap();
            let n_tensors = grads.len();
            for t in 0..n_tensors {
                let base: Vec<f64> = model.params()[t].to_vec();
                let fd = finite_diff(
                    |p| {
                        let mut m = model.clone();
                        m.params_mut()[t].copy_from_slice(p);
                        let out = m.forward_with_noise(&x, &eps).unwrap();
                        vae_loss(&x, &out.x_hat, &out.mu, &out.logvar).unwrap().total
                    },
                    &base,
                    1e-5,
                )
                .unwrap();
                for (a, n) in grads[t].iter().zip(&fd) {
                    let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-4);
                    assert!(rel < 1e-4, "{v} tensor {t}: analytic {a} numeric {n}");
                }
            }
        }
    }

    #[test]
    fn chaotic_and_gaussian_agree_given_same_eps() {
        let mut rng = Rng::new(5);
        let gauss = VaeModel::new(Variant::VaeWnn, &arch(4, &[3], 2), &mut rng).unwrap();
        let mut chaotic = gauss.clone();
        chaotic.variant = Variant::CvaeWnn;
        let x = Matrix::from_fn(6, 4, |_, _| rng.next_f64());
        let eps = NoiseSource::chaotic(0.3).unwrap().draw(6, 2);
        let a = gauss.forward_with_noise(&x, &eps).unwrap();
        let b = chaotic.forward_with_noise(&x, &eps).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn train_rejects_bad_config_and_noise() {
        let mut rng = Rng::new(6);
        let mut model = VaeModel::new(Variant::VaeMlp, &arch(3, &[4], 2), &mut rng).unwrap();
        let x = Matrix::from_fn(10, 3, |_, _| rng.next_f64());
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        assert!(train(&mut model, &x, &cfg, &mut NoiseSource::gaussian(1)).is_err());
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        assert!(matches!(
            train(&mut model, &x, &cfg, &mut NoiseSource::chaotic(0.3).unwrap()),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn train_is_deterministic() {
        let run = || {
            let mut rng = Rng::new(7);
            let mut model = VaeModel::new(Variant::CvaeWnn, &arch(3, &[4], 2), &mut rng).unwrap();
            let x = Matrix::from_fn(50, 3, |_, _| rng.next_f64());
            let cfg = TrainConfig { epochs: 5, batch_size: 16, seed: 3, ..Default::default() };
            let hist = train(&mut model, &x, &cfg, &mut NoiseSource::chaotic(0.1234).unwrap()).unwrap();
            (hist, model)
        };
        let (h1, m1) = run();
        let (h2, m2) = run();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        assert!(h1.epsilon_mean > 0.0 && h1.epsilon_mean < 1.0);
        assert_eq!(h1.epsilon_count, 5 * 50 * 2);
    }

    #[test]
    fn dilation_floor_survives_training() {
        let mut rng = Rng::new(8);
        let mut model = VaeModel::new(Variant::VaeWnn, &arch(3, &[4], 2), &mut rng).unwrap();
        let x = Matrix::from_fn(40, 3, |_, _| rng.next_f64());
        let cfg = TrainConfig { epochs: 20, lr: 0.05, optimizer: OptimizerKind::Sgd, ..Default::default() };
        train(&mut model, &x, &cfg, &mut NoiseSource::gaussian(2)).unwrap();
        for layer in model.encoder().layers().iter().chain(model.decoder().layers()) {
            if let Layer::Wavelet(w) = layer {
                assert!(w.dilation.iter().all(|a| a.abs() >= crate::wavenet::MIN_DILATION));
            }
        }
    }
}
