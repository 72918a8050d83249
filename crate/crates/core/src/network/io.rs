//! Versioned JSON model files.
//!
//! ```json
//! {"format_version":1,"layer_sizes":[4,3,2],"hidden_activation":"sigmoid",
//!  "output_activation":"sigmoid","init_seed":7,
//!  "weights":[[...12 row-major...],[...6...]],"biases":[[...3...],[...2...]]}
//! ```
//!
//! Reals are written in shortest round-trip form, so a reload is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network, NetworkSpec};
use crate::error::{Error, ModelFileError, Result};
use crate::jsonfile::{finite_values, parse_versioned};
use crate::numerics::Matrix;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct NetworkFileOut<'a> {
    format_version: u32,
    layer_sizes: &'a [usize],
    hidden_activation: Activation,
    output_activation: Activation,
    init_seed: u64,
    weights: Vec<&'a [f64]>,
    biases: Vec<&'a [f64]>,
}

#[derive(Deserialize)]
struct NetworkFileIn {
    layer_sizes: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
    init_seed: u64,
    // null is how non-finite values end up in JSON
    weights: Vec<Vec<Option<f64>>>,
    biases: Vec<Vec<Option<f64>>>,
}

pub fn network_to_json(net: &Network) -> Result<String> {
    if !net.is_finite() {
        return Err(ModelFileError::NonFinite("network parameters".into()).into());
    }
    let spec = net.spec();
    let file = NetworkFileOut {
        format_version: FORMAT_VERSION,
        layer_sizes: &spec.layer_sizes,
        hidden_activation: spec.hidden_activation,
        output_activation: spec.output_activation,
        init_seed: spec.init_seed,
        weights: net.layers().iter().map(|l| l.weights.as_slice()).collect(),
        biases: net.layers().iter().map(|l| l.bias.as_slice()).collect(),
    };
    serde_json::to_string(&file).map_err(|e| ModelFileError::Malformed(e.to_string()).into())
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let value = parse_versioned(text, FORMAT_VERSION)?;
    let file: NetworkFileIn =
        serde_json::from_value(value).map_err(|e| ModelFileError::Malformed(e.to_string()))?;
    let spec = NetworkSpec {
        layer_sizes: file.layer_sizes,
        hidden_activation: file.hidden_activation,
        output_activation: file.output_activation,
        init_seed: file.init_seed,
    };
    spec.validate()
        .map_err(|e| ModelFileError::Malformed(e.to_string()))?;
    let depth = spec.depth();
    if file.weights.len() != depth || file.biases.len() != depth {
        return Err(ModelFileError::CorruptLength(format!(
            "expected {depth} weight and bias arrays, found {} and {}",
            file.weights.len(),
            file.biases.len()
        ))
        .into());
    }
    let mut layers = Vec::with_capacity(depth);
    for (l, (w, b)) in file.weights.into_iter().zip(file.biases).enumerate() {
        let (din, dout) = (spec.layer_sizes[l], spec.layer_sizes[l + 1]);
        if w.len() != din * dout || b.len() != dout {
            return Err(ModelFileError::CorruptLength(format!(
                "layer {l}: expected {} weights and {dout} biases, found {} and {}",
                din * dout,
                w.len(),
                b.len()
            ))
            .into());
        }
        let w = finite_values(w, &format!("layer {l} weights"))?;
        let b = finite_values(b, &format!("layer {l} biases"))?;
        layers.push(Layer {
            weights: Matrix::new(din, dout, w)?,
            bias: b,
        });
    }
    Network::from_parts(spec, layers)
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = network_to_json(net)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    network_from_json(&text)
}
