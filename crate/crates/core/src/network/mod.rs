//! Feed-forward networks trained by backpropagation with momentum mini-batch
//! gradient descent.
//!
//! Loss is `E = (1/(2N)) · Σ‖output − target‖²` over a batch of `N` rows, so
//! the output-layer error term is `(output − target) ⊙ act'(output) / N`.

mod activation;
pub mod gradcheck;
mod io;
mod train;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{rand_uniform, Matrix, SeededRng};

pub use activation::{sigmoid, Activation};
pub use io::{load_network, network_from_json, network_to_json, save_network, FORMAT_VERSION};
pub use train::{EpochRecord, TrainConfig, TrainLog};

/// Architecture of a network: `[d₀, d₁, …, d_L]` including the input width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub init_seed: u64,
}

impl NetworkSpec {
    /// Sigmoid everywhere, seed 0.
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        Self {
            layer_sizes,
            hidden_activation: Activation::Sigmoid,
            output_activation: Activation::Sigmoid,
            init_seed: 0,
        }
    }

    /// Builds a spec from the "hidden-…-output" convention (e.g. `400-200-64-900`)
    /// by prepending the input width.
    pub fn from_hidden_and_output(input_dim: usize, layers: &[usize]) -> Self {
        let mut sizes = Vec::with_capacity(layers.len() + 1);
        sizes.push(input_dim);
        sizes.extend_from_slice(layers);
        Self::new(sizes)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a network needs at least 2 layer sizes, got {:?}",
                self.layer_sizes
            )));
        }
        if self.layer_sizes.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "layer sizes must be positive, got {:?}",
                self.layer_sizes
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }

    /// Number of weight layers `L`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn activation_of(&self, layer: usize) -> Activation {
        if layer == self.depth() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Dash-joined layer sizes, e.g. `784-225-100-36-784`.
    pub fn describe(&self) -> String {
        self.layer_sizes
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Weights `W` (`d_in × d_out`) and bias (`d_out`) of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradient of the loss with respect to one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
    /// Batch loss `(1/(2N)) Σ‖output − target‖²` before any update.
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform weights `U(−r, r)`, `r = √(6/(d_in + d_out))`, zero biases.
    ///
    /// Layers are drawn in order, each row-major, from one stream seeded by
    /// `spec.init_seed`.
    pub fn init(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = SeededRng::new(spec.init_seed);
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| {
                let r = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Ok(Layer {
                    weights: rand_uniform(&mut rng, w[0], w[1], -r, r)?,
                    bias: vec![0.0; w[1]],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, layers })
    }

    /// Assembles a network from explicit parameters, checking that shapes chain.
    pub fn from_parts(spec: NetworkSpec, layers: Vec<Layer>) -> Result<Self> {
        spec.validate()?;
        if layers.len() != spec.depth() {
            return Err(Error::Length {
                op: "Network::from_parts",
                lhs: layers.len(),
                rhs: spec.depth(),
            });
        }
        for (l, layer) in layers.iter().enumerate() {
            let want = (spec.layer_sizes[l], spec.layer_sizes[l + 1]);
            if layer.weights.shape() != want || layer.bias.len() != want.1 {
                return Err(Error::Shape {
                    op: "Network::from_parts",
                    lhs: layer.weights.shape(),
                    rhs: want,
                });
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite("Network::from_parts"));
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::InvalidArgument(format!(
                "input has {} columns but the network expects d0 = {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn layer_output(&self, l: usize, input: &Matrix) -> Result<Matrix> {
        let layer = &self.layers[l];
        let act = self.spec.activation_of(l + 1);
        let mut z = input.matmul(&layer.weights)?;
        z.add_row_broadcast_inplace(&layer.bias)?;
        z.map_inplace(|v| act.apply(v));
        Ok(z)
    }

    /// All layer activations `a₀ … a_L`, with `a₀` the batch itself.
    pub fn forward(&self, batch: &Matrix) -> Result<Vec<Matrix>> {
        self.check_input(batch)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(batch.clone());
        for l in 0..self.layers.len() {
            let next = self.layer_output(l, &acts[l])?;
            acts.push(next);
        }
        Ok(acts)
    }

    /// Activation of layer `layer` (0 = input) without computing later layers.
    pub fn forward_to(&self, batch: &Matrix, layer: usize) -> Result<Matrix> {
        self.check_input(batch)?;
        if layer > self.layers.len() {
            return Err(Error::InvalidArgument(format!(
                "layer {layer} out of range 0..={}",
                self.layers.len()
            )));
        }
        let mut a = batch.clone();
        for l in 0..layer {
            a = self.layer_output(l, &a)?;
        }
        Ok(a)
    }

    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        self.forward_to(batch, self.layers.len())
    }

    /// Gradients of the batch loss with respect to every parameter.
    pub fn backward(&self, batch: &Matrix, targets: &Matrix) -> Result<Gradients> {
        if targets.rows() != batch.rows() || targets.cols() != self.output_dim() {
            return Err(Error::Shape {
                op: "backward targets",
                lhs: targets.shape(),
                rhs: (batch.rows(), self.output_dim()),
            });
        }
        if batch.rows() == 0 {
            return Err(Error::Empty("backward batch"));
        }
        let acts = self.forward(batch)?;
        let n = batch.rows() as f64;
        let output = &acts[self.layers.len()];
        let loss = mse(output, targets)?;

        let out_act = self.spec.output_activation;
        let mut delta = output.sub(targets)?;
        for (d, &y) in delta.as_mut_slice().iter_mut().zip(output.as_slice()) {
            *d *= out_act.derivative_from_output(y) / n;
        }

        let mut grads: Vec<LayerGradient> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let dw = acts[l].t_matmul(&delta)?;
            let db = delta.column_sums();
            if l > 0 {
                let act = self.spec.activation_of(l);
                let mut prev = delta.matmul(&self.layers[l].weights.transpose())?;
                for (d, &y) in prev.as_mut_slice().iter_mut().zip(acts[l].as_slice()) {
                    *d *= act.derivative_from_output(y);
                }
                delta = prev;
            }
            grads.push(LayerGradient { weights: dw, bias: db });
        }
        grads.reverse();
        Ok(Gradients { layers: grads, mse: loss })
    }

    /// `(1/(2N)) Σ‖output − target‖²` over the whole set, evaluated in chunks.
    pub fn loss(&self, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
        if inputs.rows() != targets.rows() {
            return Err(Error::Length {
                op: "loss rows",
                lhs: inputs.rows(),
                rhs: targets.rows(),
            });
        }
        if inputs.rows() == 0 {
            return Err(Error::Empty("loss inputs"));
        }
        const CHUNK: usize = 512;
        let mut total = 0.0;
        let mut start = 0;
        while start < inputs.rows() {
            let end = (start + CHUNK).min(inputs.rows());
            let out = self.predict(&inputs.slice_rows(start, end))?;
            let tgt = targets.slice_rows(start, end);
            if out.shape() != tgt.shape() {
                return Err(Error::Shape {
                    op: "loss targets",
                    lhs: tgt.shape(),
                    rhs: out.shape(),
                });
            }
            total += sum_squared_diff(&out, &tgt);
            start = end;
        }
        Ok(total / (2.0 * inputs.rows() as f64))
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    /// Trains in place. See [`TrainConfig`] for the update rule and stop rule.
    pub fn train(&mut self, inputs: &Matrix, targets: &Matrix, cfg: &TrainConfig) -> Result<TrainLog> {
        train::train(self, inputs, targets, cfg, Instant::now())
    }
}

fn sum_squared_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// `(1/(2N)) · Σ (pred − target)²` over all elements, `N` = row count.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape {
            op: "mse",
            lhs: pred.shape(),
            rhs: target.shape(),
        });
    }
    if pred.rows() == 0 {
        return Err(Error::Empty("mse"));
    }
    Ok(sum_squared_diff(pred, target) / (2.0 * pred.rows() as f64))
}

/// Same as [`Network::init`].
pub fn init_network(spec: NetworkSpec) -> Result<Network> {
    Network::init(spec)
}
