//! Fully connected ReLU network trained with ADAM on mean squared error.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::linalg::Matrix;
use crate::math;

/// Architecture and optimizer settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MlpConfig {
    /// Widths of the trainable hidden layers; the output layer has width 1.
    pub hidden: Vec<usize>,
    /// ADAM step size.
    pub learning_rate: f64,
    /// Mini-batch size.
    pub batch_size: usize,
    /// Passes over the training set.
    pub epochs: usize,
    /// Seed for initialization and shuffling.
    pub seed: u64,
    /// First-moment decay.
    pub beta1: f64,
    /// Second-moment decay.
    pub beta2: f64,
    /// Denominator offset.
    pub epsilon: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![24, 12, 4],
            learning_rate: 0.001,
            batch_size: 32,
            epochs: 1000,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One affine layer; `w` is `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dense {
    /// Weights.
    pub w: Matrix,
    /// Biases.
    pub b: Vec<f64>,
}

impl Dense {
    fn zeros_like(&self) -> Self {
        Self { w: Matrix::zeros(self.w.rows(), self.w.cols()), b: vec![0.0; self.b.len()] }
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.w.as_slice().iter().chain(self.b.iter())
    }
}

/// Layer stack: ReLU on every layer but the last, which is linear.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Network {
    /// Layers from input to output.
    pub layers: Vec<Dense>,
}

/// Per-layer scratch space for forward and backward passes.
struct Workspace {
    /// Pre-activations per layer.
    z: Vec<Vec<f64>>,
    /// Activations per layer (post-ReLU for hidden layers).
    a: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Network {
    /// Glorot-uniform weights and zero biases for widths `[p, h1, ..., 1]`.
    pub fn init<R: Rng>(widths: &[usize], rng: &mut R) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
                let data = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
                Dense { w: Matrix::from_vec(fan_out, fan_in, data), b: vec![0.0; fan_out] }
            })
            .collect();
        Self { layers }
    }

    /// Input width.
    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, |l| l.w.cols())
    }

    /// Total trainable parameter count.
    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.as_slice().len() + l.b.len()).sum()
    }

    fn workspace(&self) -> Workspace {
        let widths: Vec<usize> = self.layers.iter().map(|l| l.b.len()).collect();
        Workspace {
            z: widths.iter().map(|&w| vec![0.0; w]).collect(),
            a: widths.iter().map(|&w| vec![0.0; w]).collect(),
            delta: widths.iter().map(|&w| vec![0.0; w]).collect(),
        }
    }

    fn forward_into(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.a.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &before[l - 1] };
            let z = &mut ws.z[l];
            let out = &mut after[0];
            for (o, (row, b)) in layer.w.iter_rows().zip(&layer.b).enumerate() {
                let s = b + crate::linalg::dot(row, input);
                z[o] = s;
                out[o] = if l == last || s > 0.0 { s } else { 0.0 };
            }
        }
        ws.a[last][0]
    }

    /// Network output for one input row.
    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut ws = self.workspace();
        self.forward_into(x, &mut ws)
    }

    /// Mean squared error over the rows and its gradient for every layer.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64]) -> (f64, Vec<Dense>) {
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        let mut ws = self.workspace();
        let loss = self.accumulate(x, y, &(0..y.len()).collect::<Vec<_>>(), &mut grads, &mut ws);
        (loss, grads)
    }

    /// Accumulate gradients of the batch MSE over rows `idx` into `grads`.
    fn accumulate(&self, x: &Matrix, y: &[f64], idx: &[usize], grads: &mut [Dense], ws: &mut Workspace) -> f64 {
        let scale = 1.0 / idx.len() as f64;
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        for &i in idx {
            let xi = x.row(i);
            let err = self.forward_into(xi, ws) - y[i];
            loss += err * err;
            ws.delta[last][0] = 2.0 * err * scale;
            for l in (0..=last).rev() {
                let input: &[f64] = if l == 0 { xi } else { &ws.a[l - 1] };
                let g = &mut grads[l];
                let delta = &ws.delta[l];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.b[o] += d;
                    for (gw, &inp) in g.w.row_mut(o).iter_mut().zip(input) {
                        *gw += d * inp;
                    }
                }
                if l > 0 {
                    let (lower, upper) = ws.delta.split_at_mut(l);
                    let prev = &mut lower[l - 1];
                    prev.iter_mut().for_each(|v| *v = 0.0);
                    for (o, &d) in upper[0].iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        for (p, &w) in prev.iter_mut().zip(self.layers[l].w.row(o)) {
                            *p += w * d;
                        }
                    }
                    for (p, &z) in prev.iter_mut().zip(&ws.z[l - 1]) {
                        if z <= 0.0 {
                            *p = 0.0;
                        }
                    }
                }
            }
        }
        loss * scale
    }
}

/// ADAM moment accumulators.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamState {
    /// First moments, shaped like the layers.
    pub m: Vec<Dense>,
    /// Second moments.
    pub v: Vec<Dense>,
    /// Steps taken.
    pub step: u64,
}

impl AdamState {
    fn new(net: &Network) -> Self {
        Self { m: net.layers.iter().map(Dense::zeros_like).collect(), v: net.layers.iter().map(Dense::zeros_like).collect(), step: 0 }
    }

    fn update(&mut self, net: &mut Network, grads: &[Dense], cfg: &MlpConfig) {
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(cfg.beta1, t);
        let c2 = 1.0 - libm::pow(cfg.beta2, t);
        let step = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let mh = *m / c1;
            let vh = *v / c2;
            *p -= cfg.learning_rate * mh / (math::sqrt(vh) + cfg.epsilon);
        };
        for (((layer, g), m), v) in net.layers.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            let params = layer.w.as_mut_slice().iter_mut().chain(layer.b.iter_mut());
            let gs = g.w.as_slice().iter().chain(g.b.iter());
            let ms = m.w.as_mut_slice().iter_mut().chain(m.b.iter_mut());
            let vs = v.w.as_mut_slice().iter_mut().chain(v.b.iter_mut());
            for (((p, &gk), mk), vk) in params.zip(gs).zip(ms).zip(vs) {
                step(p, gk, mk, vk);
            }
        }
    }
}

/// Trained network with its target scaling and optimizer state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpModel {
    /// Settings used for training.
    pub config: MlpConfig,
    /// Trained weights.
    pub network: Network,
    /// Optimizer moments at the end of training.
    pub adam: AdamState,
    /// Target mean removed during training.
    pub target_mean: f64,
    /// Target scale divided out during training.
    pub target_std: f64,
    /// Mean batch loss per epoch on standardized targets.
    pub loss_history: Vec<f64>,
}

impl MlpModel {
    /// Train on `x` (already standardized) and `y` in target units.
    pub fn fit(x: &Matrix, y: &[f64], config: &MlpConfig) -> Result<Self, ModelError> {
        if x.rows() != y.len() {
            return Err(ModelError::LengthMismatch { rows: x.rows(), targets: y.len() });
        }
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if config.batch_size == 0 || !(config.learning_rate > 0.0) || config.hidden.contains(&0) {
            return Err(ModelError::InvalidHyperparameter("MLP needs positive batch size, learning rate and widths"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut widths = Vec::with_capacity(config.hidden.len() + 2);
        widths.push(x.cols());
        widths.extend_from_slice(&config.hidden);
        widths.push(1);
        let mut network = Network::init(&widths, &mut rng);
        let mut adam = AdamState::new(&network);

        let target_mean = math::mean(y);
        let sd = math::sqrt(math::variance(y));
        let target_std = if sd > 0.0 { sd } else { 1.0 };
        let z: Vec<f64> = y.iter().map(|v| (v - target_mean) / target_std).collect();

        let mut order: Vec<usize> = (0..y.len()).collect();
        let mut grads: Vec<Dense> = network.layers.iter().map(Dense::zeros_like).collect();
        let mut ws = network.workspace();
        let mut loss_history = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut batches = 0usize;
            for batch in order.chunks(config.batch_size) {
                for g in grads.iter_mut() {
                    g.w.as_mut_slice().iter_mut().chain(g.b.iter_mut()).for_each(|v| *v = 0.0);
                }
                epoch_loss += network.accumulate(x, &z, batch, &mut grads, &mut ws);
                batches += 1;
                adam.update(&mut network, &grads, config);
            }
            let mean_loss = epoch_loss / batches as f64;
            if !mean_loss.is_finite() || !network.layers.iter().all(|l| l.params().all(|p| p.is_finite())) {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            loss_history.push(mean_loss);
        }
        Ok(Self { config: config.clone(), network, adam, target_mean, target_std, loss_history })
    }

    /// Prediction for one standardized row, in target units.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.target_mean + self.target_std * self.network.forward(row)
    }
}
