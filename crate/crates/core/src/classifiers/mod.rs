//! Downstream classifiers: k-nearest neighbors and a small sigmoid MLP.

mod knn;
mod model;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NetworkSpec, TrainConfig, TrainLog};
use crate::numerics::Matrix;

pub use knn::{knn_predict, KnnModel};
pub use model::ClassifierModel;

/// Hidden layer widths of an MLP classifier, e.g. `[75, 50]` for `75-50-38`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub hidden_sizes: Vec<usize>,
    #[serde(default)]
    pub init_seed: u64,
}

impl ClassifierSpec {
    pub fn new(hidden_sizes: Vec<usize>) -> Self {
        Self {
            hidden_sizes,
            init_seed: 0,
        }
    }

    /// Layer sizes `[d, hidden…, classes]`.
    pub fn layer_sizes(&self, input_dim: usize, classes: usize) -> Vec<usize> {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(&self.hidden_sizes);
        sizes.push(classes);
        sizes
    }
}

/// One-hot rows with `classes` columns.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(labels.len(), classes);
    for (r, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        m.set(r, label, 1.0);
    }
    Ok(m)
}

/// Trains a sigmoid MLP `[d, hidden…, C]` on one-hot targets, `C = max label + 1`.
pub fn train_mlp_classifier(
    features: &Matrix,
    labels: &[usize],
    spec: &ClassifierSpec,
    cfg: &TrainConfig,
) -> Result<(Network, TrainLog)> {
    if labels.len() != features.rows() {
        return Err(Error::Length {
            op: "train_mlp_classifier labels",
            lhs: labels.len(),
            rhs: features.rows(),
        });
    }
    if !features.is_finite() {
        return Err(Error::NonFinite("classifier features"));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let distinct = {
        let mut seen = vec![false; classes];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::InvalidArgument(format!(
            "an MLP classifier needs at least 2 classes, found {distinct}"
        )));
    }
    let net_spec =
        NetworkSpec::new(spec.layer_sizes(features.cols(), classes)).with_seed(spec.init_seed);
    let mut net = Network::init(net_spec)?;
    let targets = one_hot(labels, classes)?;
    let log = net.train(features, &targets, cfg)?;
    Ok((net, log))
}

/// Argmax over output units; ties resolve to the lowest class index.
pub fn mlp_classify(net: &Network, features: &Matrix) -> Result<Vec<usize>> {
    let out = net.predict(features)?;
    Ok(out.iter_rows().map(argmax).collect())
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Length {
            op: "accuracy",
            lhs: pred.len(),
            rhs: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty("accuracy"));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}
