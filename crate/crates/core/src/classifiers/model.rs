use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::{mlp_classify, KnnModel};
use crate::error::{Error, ModelFileError, Result};
use crate::jsonfile::{finite_values, parse_versioned};
use crate::network::{network_from_json, network_to_json, Network, FORMAT_VERSION};
use crate::numerics::Matrix;

/// A fitted classifier of either kind.
///
/// JSON: `{"format_version":1,"kind":"knn","k":3,"points":[[...],...],"labels":[...]}`
/// or `{"format_version":1,"kind":"mlp","network":{...network file...}}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Knn(KnnModel),
    Mlp(Network),
}

impl ClassifierModel {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        match self {
            ClassifierModel::Knn(m) => m.predict(features),
            ClassifierModel::Mlp(net) => mlp_classify(net, features),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ClassifierModel::Knn(m) => m.points().cols(),
            ClassifierModel::Mlp(net) => net.input_dim(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let value = match self {
            ClassifierModel::Knn(m) => {
                if !m.points().is_finite() {
                    return Err(ModelFileError::NonFinite("kNN points".into()).into());
                }
                json!({
                    "format_version": FORMAT_VERSION,
                    "kind": "knn",
                    "k": m.k(),
                    "points": m.points().to_rows(),
                    "labels": m.labels(),
                })
            }
            ClassifierModel::Mlp(net) => {
                let inner: Value = serde_json::from_str(&network_to_json(net)?)
                    .map_err(|e| ModelFileError::Malformed(e.to_string()))?;
                json!({"format_version": FORMAT_VERSION, "kind": "mlp", "network": inner})
            }
        };
        Ok(value.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value = parse_versioned(text, FORMAT_VERSION)?;
        let malformed = |what: &str| Error::from(ModelFileError::Malformed(what.to_string()));
        match value.get("kind").and_then(Value::as_str) {
            Some("knn") => {
                let k = value.get("k").and_then(Value::as_u64).ok_or_else(|| malformed("missing k"))? as usize;
                let labels: Vec<usize> = serde_json::from_value(value["labels"].clone())
                    .map_err(|e| malformed(&e.to_string()))?;
                let rows: Vec<Vec<Option<f64>>> = serde_json::from_value(value["points"].clone())
                    .map_err(|e| malformed(&e.to_string()))?;
                let dim = rows.first().map_or(0, Vec::len);
                if rows.len() != labels.len() || rows.iter().any(|r| r.len() != dim) {
                    return Err(ModelFileError::CorruptLength("kNN points and labels disagree".into()).into());
                }
                let mut flat = Vec::with_capacity(rows.len() * dim);
                for r in rows {
                    flat.extend(finite_values(r, "kNN points")?);
                }
                let points = Matrix::new(labels.len(), dim, flat)?;
                Ok(ClassifierModel::Knn(KnnModel::new(points, labels, k)?))
            }
            Some("mlp") => {
                let inner = value.get("network").ok_or_else(|| malformed("missing network"))?;
                Ok(ClassifierModel::Mlp(network_from_json(&inner.to_string())?))
            }
            other => Err(malformed(&format!("unknown classifier kind {other:?}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
