//! A single-hidden-layer feed-forward network with logistic activations,
//! trained by per-sample backpropagation.
//!
//! Notation follows the usual textbook layout: `v`/`v0` are the
//! input→hidden weights and biases, `w`/`w0` the hidden→output ones.
//! Weight matrices are stored row-major, so `v[i * n_hidden + j]` connects
//! input `i` to hidden unit `j` and `w[j * n_out + k]` connects hidden unit
//! `j` to output `k`.

mod model;

pub use model::{load_model, save_model, ModelError, MODEL_FORMAT_VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("topology entries must all be at least 1")]
    ZeroDimension,
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no training examples")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
}

impl Topology {
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize) -> Result<Self, NetError> {
        if n_in == 0 || n_hidden == 0 || n_out == 0 {
            return Err(NetError::ZeroDimension);
        }
        Ok(Topology { n_in, n_hidden, n_out })
    }

    pub fn n_params(&self) -> usize {
        self.n_in * self.n_hidden + self.n_hidden + self.n_hidden * self.n_out + self.n_out
    }
}

impl std::str::FromStr for Topology {
    type Err = String;

    /// Parses `"11,100,1"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("bad topology {s:?}: {e}"))?;
        match parts.as_slice() {
            [a, b, c] => Topology::new(*a, *b, *c).map_err(|e| e.to_string()),
            _ => Err(format!("topology {s:?} must have three comma-separated sizes")),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.n_in, self.n_hidden, self.n_out)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Derivative of the sigmoid expressed through its output `fx = f(x)`.
fn sigmoid_prime_from_output(fx: f64) -> f64 {
    fx * (1.0 - fx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub topology: Topology,
    pub v: Vec<f64>,
    pub v0: Vec<f64>,
    pub w: Vec<f64>,
    pub w0: Vec<f64>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub z_in: Vec<f64>,
    pub z: Vec<f64>,
    pub y_in: Vec<f64>,
    pub y: Vec<f64>,
}

/// Per-sample update for every parameter, laid out like [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Deltas {
    pub v: Vec<f64>,
    pub v0: Vec<f64>,
    pub w: Vec<f64>,
    pub w0: Vec<f64>,
}

/// Training pair with an arbitrary-width target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Self {
        Sample { x, t }
    }
}

/// Weights and biases drawn uniformly from [-0.5, 0.5], filled in the order
/// v (row-major), v0, w (row-major), w0.
pub fn init_network(topology: Topology, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect() };
    let v = draw(topology.n_in * topology.n_hidden);
    let v0 = draw(topology.n_hidden);
    let w = draw(topology.n_hidden * topology.n_out);
    let w0 = draw(topology.n_out);
    Network { topology, v, v0, w, w0 }
}

impl Network {
    /// A network with every parameter zero.
    pub fn zeros(topology: Topology) -> Self {
        Network {
            topology,
            v: vec![0.0; topology.n_in * topology.n_hidden],
            v0: vec![0.0; topology.n_hidden],
            w: vec![0.0; topology.n_hidden * topology.n_out],
            w0: vec![0.0; topology.n_out],
        }
    }

    pub fn n_params(&self) -> usize {
        self.topology.n_params()
    }

    /// Parameters flattened in init fill order.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().chain(&self.v0).chain(&self.w).chain(&self.w0).copied()
    }

    /// Mutable access to the `idx`-th parameter in fill order.
    pub fn param_mut(&mut self, idx: usize) -> &mut f64 {
        let (nv, nh, nw) = (self.v.len(), self.v0.len(), self.w.len());
        if idx < nv {
            &mut self.v[idx]
        } else if idx < nv + nh {
            &mut self.v0[idx - nv]
        } else if idx < nv + nh + nw {
            &mut self.w[idx - nv - nh]
        } else {
            &mut self.w0[idx - nv - nh - nw]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(f64::is_finite)
    }

    fn check_len(expected: usize, got: usize) -> Result<(), NetError> {
        if expected != got {
            return Err(NetError::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    pub fn activations(&self, x: &[f64]) -> Result<Activations, NetError> {
        let Topology { n_in, n_hidden, n_out } = self.topology;
        Self::check_len(n_in, x.len())?;
        let mut z_in = self.v0.clone();
        for (i, xi) in x.iter().enumerate() {
            let row = &self.v[i * n_hidden..(i + 1) * n_hidden];
            for (acc, vij) in z_in.iter_mut().zip(row) {
                *acc += xi * vij;
            }
        }
        let z: Vec<f64> = z_in.iter().map(|&s| sigmoid(s)).collect();
        let mut y_in = self.w0.clone();
        for (j, zj) in z.iter().enumerate() {
            let row = &self.w[j * n_out..(j + 1) * n_out];
            for (acc, wjk) in y_in.iter_mut().zip(row) {
                *acc += zj * wjk;
            }
        }
        let y = y_in.iter().map(|&s| sigmoid(s)).collect();
        Ok(Activations { z_in, z, y_in, y })
    }

    /// Hidden and output activations for one input.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NetError> {
        let a = self.activations(x)?;
        Ok((a.z, a.y))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        Ok(self.activations(x)?.y)
    }

    /// Parameter changes for one sample, computed entirely from the current
    /// weights. Also returns the squared error before the update.
    pub fn deltas(&self, x: &[f64], t: &[f64], alpha: f64) -> Result<(Deltas, f64), NetError> {
        let Topology { n_in, n_hidden, n_out } = self.topology;
        Self::check_len(n_out, t.len())?;
        let a = self.activations(x)?;

        let mut error = 0.0;
        let delta_out: Vec<f64> = (0..n_out)
            .map(|k| {
                let diff = t[k] - a.y[k];
                error += diff * diff;
                diff * sigmoid_prime_from_output(a.y[k])
            })
            .collect();

        let mut dw = vec![0.0; n_hidden * n_out];
        let mut delta_hidden = vec![0.0; n_hidden];
        for j in 0..n_hidden {
            let mut delta_in = 0.0;
            for k in 0..n_out {
                dw[j * n_out + k] = alpha * delta_out[k] * a.z[j];
                delta_in += delta_out[k] * self.w[j * n_out + k];
            }
            delta_hidden[j] = delta_in * sigmoid_prime_from_output(a.z[j]);
        }
        let dw0 = delta_out.iter().map(|d| alpha * d).collect();

        let mut dv = vec![0.0; n_in * n_hidden];
        for (i, xi) in x.iter().enumerate() {
            for j in 0..n_hidden {
                dv[i * n_hidden + j] = alpha * delta_hidden[j] * xi;
            }
        }
        let dv0 = delta_hidden.iter().map(|d| alpha * d).collect();
        Ok((
            Deltas {
                v: dv,
                v0: dv0,
                w: dw,
                w0: dw0,
            },
            error,
        ))
    }

    /// One on-line backpropagation update. Returns the sample's squared error
    /// measured before the update.
    pub fn train_step(&mut self, x: &[f64], t: &[f64], alpha: f64) -> Result<f64, NetError> {
        let (d, error) = self.deltas(x, t, alpha)?;
        let add = |dst: &mut [f64], src: &[f64]| dst.iter_mut().zip(src).for_each(|(p, dp)| *p += dp);
        add(&mut self.w, &d.w);
        add(&mut self.w0, &d.w0);
        add(&mut self.v, &d.v);
        add(&mut self.v0, &d.v0);
        Ok(error)
    }
}

/// Mean over examples and outputs of the squared error, summed in example
/// order then output order.
pub fn mse(net: &Network, examples: &[Sample]) -> Result<f64, NetError> {
    if examples.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    let mut total = 0.0;
    for s in examples {
        Network::check_len(net.topology.n_out, s.t.len())?;
        let y = net.predict(&s.x)?;
        for (tk, yk) in s.t.iter().zip(&y) {
            total += (tk - yk) * (tk - yk);
        }
    }
    Ok(total / (examples.len() * net.topology.n_out) as f64)
}

/// Gradients smaller than this are compared in absolute rather than relative
/// terms: below it the central difference is dominated by rounding noise.
pub const GRADIENT_FLOOR: f64 = 1e-4;

/// Compares backprop updates against central differences.
///
/// The update rule descends `E/2` with `E = Σ (t_k - y_k)²`, so the numeric
/// side differentiates the half error and the analytic side is `-Δp / α`.
/// Returns the largest relative error over all parameters, with denominators
/// floored at [`GRADIENT_FLOOR`].
pub fn gradient_check(net: &Network, x: &[f64], t: &[f64], h: f64) -> Result<f64, NetError> {
    let alpha = 1.0;
    let (d, _) = net.deltas(x, t, alpha)?;
    let analytic: Vec<f64> = d
        .v
        .iter()
        .chain(&d.v0)
        .chain(&d.w)
        .chain(&d.w0)
        .map(|dp| -dp / alpha)
        .collect();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (idx, a) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(idx);
        *probe.param_mut(idx) = orig + h;
        let plus = probe.predict(x)?;
        *probe.param_mut(idx) = orig - h;
        let minus = probe.predict(x)?;
        *probe.param_mut(idx) = orig;
        // ½Σ(t−y₊)² − ½Σ(t−y₋)² factored per output, so the two error totals
        // never have to cancel against each other
        let diff: f64 = plus
            .iter()
            .zip(&minus)
            .zip(t)
            .map(|((yp, ym), t)| 0.5 * (ym - yp) * (2.0 * t - yp - ym))
            .sum();
        let numeric = diff / (2.0 * h);
        let denom = a.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub max_epochs: usize,
    pub goal_mse: f64,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.3,
            max_epochs: 100_000,
            goal_mse: 1e-6,
            seed: 42,
            shuffle_each_epoch: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(NetError::InvalidConfig("alpha must be positive"));
        }
        if self.max_epochs == 0 {
            return Err(NetError::InvalidConfig("max_epochs must be at least 1"));
        }
        if !(self.goal_mse >= 0.0) {
            return Err(NetError::InvalidConfig("goal_mse must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GoalReached,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_mse: f64,
    pub mse_history: Vec<f64>,
    pub stopped_by: StopReason,
}

// Separates the shuffle stream from the init stream when both use one seed.
const SHUFFLE_STREAM: u64 = 1;

/// Trains in place. `on_epoch` sees each epoch number (1-based) and its MSE.
pub fn train_with<F: FnMut(usize, f64)>(
    net: &mut Network,
    examples: &[Sample],
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainReport, NetError> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    for s in examples {
        Network::check_len(net.topology.n_in, s.x.len())?;
        Network::check_len(net.topology.n_out, s.t.len())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::new();
    let mut stopped_by = StopReason::MaxEpochs;
    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            net.train_step(&examples[i].x, &examples[i].t, cfg.alpha)?;
        }
        let epoch_mse = mse(net, examples)?;
        history.push(epoch_mse);
        on_epoch(epoch, epoch_mse);
        if epoch_mse <= cfg.goal_mse {
            stopped_by = StopReason::GoalReached;
            break;
        }
    }
    Ok(TrainReport {
        epochs_run: history.len(),
        final_mse: *history.last().expect("at least one epoch"),
        mse_history: history,
        stopped_by,
    })
}

pub fn train(net: &mut Network, examples: &[Sample], cfg: &TrainConfig) -> Result<TrainReport, NetError> {
    train_with(net, examples, cfg, |_, _| {})
}
