use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

/// Hyperparameters of momentum mini-batch gradient descent.
///
/// Update per batch: `v ← momentum·v − learning_rate·g; θ ← θ + v`.
/// Rows are visited in a fresh seeded permutation each epoch; the final
/// short batch is kept and averaged over its own size. Training stops after
/// `max_epochs` or as soon as the epoch's training-set loss is `≤ target_mse`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 500,
            target_mse: 1e-4,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    /// Parses TOML with any subset of the fields; the rest keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive".into());
        }
        if !(self.target_mse >= 0.0) {
            return bad(format!("target_mse must be non-negative, got {}", self.target_mse));
        }
        Ok(())
    }
}

/// One epoch of training.
///
/// Equality compares `epoch` and `mse` only; wall-clock time differs between
/// otherwise identical runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training-set loss after the epoch's updates.
    pub mse: f64,
    /// Seconds since training started.
    pub seconds: f64,
}

impl PartialEq for EpochRecord {
    fn eq(&self, other: &Self) -> bool {
        self.epoch == other.epoch && self.mse.to_bits() == other.mse.to_bits()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn final_mse(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mse)
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs.len()
    }

    pub fn seconds(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.seconds)
    }
}

pub(super) fn train(
    net: &mut Network,
    inputs: &Matrix,
    targets: &Matrix,
    cfg: &TrainConfig,
    start: Instant,
) -> Result<TrainLog> {
    cfg.validate()?;
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    if targets.rows() != n {
        return Err(Error::Length {
            op: "train rows",
            lhs: n,
            rhs: targets.rows(),
        });
    }
    if inputs.cols() != net.input_dim() || targets.cols() != net.output_dim() {
        return Err(Error::Shape {
            op: "train widths",
            lhs: (inputs.cols(), targets.cols()),
            rhs: (net.input_dim(), net.output_dim()),
        });
    }

    let mut velocity: Vec<(Matrix, Vec<f64>)> = net
        .layers()
        .iter()
        .map(|l| (Matrix::zeros(l.weights.rows(), l.weights.cols()), vec![0.0; l.bias.len()]))
        .collect();
    let mut rng = SeededRng::new(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = TrainLog::default();

    for epoch in 0..cfg.max_epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let xb = inputs.select_rows(chunk);
            let tb = targets.select_rows(chunk);
            let grads = net.backward(&xb, &tb)?;
            for ((layer, (vw, vb)), g) in net
                .layers_mut()
                .iter_mut()
                .zip(velocity.iter_mut())
                .zip(&grads.layers)
            {
                step(layer.weights.as_mut_slice(), vw.as_mut_slice(), g.weights.as_slice(), cfg);
                step(&mut layer.bias, vb, &g.bias, cfg);
            }
        }
        if !net.is_finite() {
            return Err(Error::NonFinite("train (diverged; lower the learning rate)"));
        }
        let mse = net.loss(inputs, targets)?;
        let seconds = start.elapsed().as_secs_f64();
        log::debug!("epoch {epoch}: mse {mse:.6e} ({seconds:.1}s)");
        log.epochs.push(EpochRecord { epoch, mse, seconds });
        if mse <= cfg.target_mse {
            break;
        }
    }
    Ok(log)
}

#[inline]
fn step(params: &mut [f64], velocity: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = cfg.momentum * *v - cfg.learning_rate * g;
        *p += *v;
    }
}
