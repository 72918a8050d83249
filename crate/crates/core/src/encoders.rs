//! Discriminative encoders and autoencoders.
//!
//! Both are encoder/decoder networks whose output layer lives in input space.
//! An autoencoder learns `x ↦ x`; a discriminative encoder learns
//! `x ↦ template(label(x))`, where the template is one fixed "ideal input"
//! per class. Features are read from the bottleneck layer.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, ModelFileError, Result};
use crate::jsonfile::{corrupt_json, finite_values};
use crate::network::{Network, NetworkSpec, TrainConfig, TrainLog};
use crate::numerics::Matrix;

/// How each class's ideal input is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemplateStrategy {
    /// Arithmetic mean of the class's training rows.
    #[default]
    ClassMean,
    /// A designated training row per class: `indices[c]` is a row labeled `c`.
    CanonicalExemplar { indices: Vec<usize> },
}

/// One template vector per class, indexed by class id.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    dim: usize,
    templates: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let dim = templates.first().map_or(0, Vec::len);
        if templates.is_empty() || dim == 0 {
            return Err(Error::Empty("template set"));
        }
        if names.len() != templates.len() {
            return Err(Error::Length {
                op: "TemplateSet names",
                lhs: names.len(),
                rhs: templates.len(),
            });
        }
        if let Some(t) = templates.iter().find(|t| t.len() != dim) {
            return Err(Error::Length {
                op: "TemplateSet template",
                lhs: t.len(),
                rhs: dim,
            });
        }
        let templates = templates
            .into_iter()
            .map(|t| t.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect();
        Ok(Self { dim, templates, names })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.templates.len()
    }

    pub fn template(&self, class: usize) -> Option<&[f64]> {
        self.templates.get(class).map(Vec::as_slice)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.templates).expect("templates share one dimension")
    }
}

/// Builds one template per class of `train`, clamped to `[0, 1]`.
pub fn build_templates(train: &Dataset, strategy: &TemplateStrategy) -> Result<TemplateSet> {
    if train.is_empty() {
        return Err(Error::Empty("training set for templates"));
    }
    let members = train.class_indices();
    let templates = match strategy {
        TemplateStrategy::ClassMean => members
            .iter()
            .enumerate()
            .map(|(class, rows)| {
                if rows.is_empty() {
                    return Err(Error::InvalidArgument(format!("class {class} has no training samples")));
                }
                let mut sum = vec![0.0; train.dim()];
                for &r in rows {
                    for (s, &v) in sum.iter_mut().zip(train.x().row(r)) {
                        *s += v;
                    }
                }
                let n = rows.len() as f64;
                Ok(sum.into_iter().map(|s| s / n).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?,
        TemplateStrategy::CanonicalExemplar { indices } => {
            if indices.len() != train.num_classes() {
                return Err(Error::Length {
                    op: "exemplar indices",
                    lhs: indices.len(),
                    rhs: train.num_classes(),
                });
            }
            indices
                .iter()
                .enumerate()
                .map(|(class, &row)| {
                    let label = *train.labels().get(row).ok_or_else(|| {
                        Error::InvalidArgument(format!("exemplar row {row} out of range for class {class}"))
                    })?;
                    if label != class {
                        return Err(Error::InvalidArgument(format!(
                            "exemplar row {row} has label {label}, expected class {class}"
                        )));
                    }
                    Ok(train.x().row(row).to_vec())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?
        }
    };
    TemplateSet::new(templates, train.class_names().to_vec())
}

/// Row `i` is the template of sample `i`'s class.
pub fn make_targets(train: &Dataset, templates: &TemplateSet) -> Result<Matrix> {
    if templates.dim() != train.dim() {
        return Err(Error::Length {
            op: "make_targets dimension",
            lhs: templates.dim(),
            rhs: train.dim(),
        });
    }
    let mut out = Matrix::zeros(train.len(), train.dim());
    for (i, &label) in train.labels().iter().enumerate() {
        let t = templates
            .template(label)
            .ok_or_else(|| Error::InvalidArgument(format!("no template for label {label}")))?;
        out.row_mut(i).copy_from_slice(t);
    }
    Ok(out)
}

/// Index (into the activation list) of the narrowest hidden layer, earliest on ties.
pub fn bottleneck_index(layer_sizes: &[usize]) -> Result<usize> {
    if layer_sizes.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "an encoder needs at least one hidden layer, got {layer_sizes:?}"
        )));
    }
    let hidden = &layer_sizes[1..layer_sizes.len() - 1];
    let (offset, _) = hidden
        .iter()
        .enumerate()
        .min_by_key(|&(i, &w)| (w, i))
        .expect("non-empty hidden layers");
    Ok(offset + 1)
}

/// A trained encoder/decoder network plus the bottleneck it is read from.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    network: Network,
    bottleneck_layer: usize,
}

impl EncoderModel {
    /// Wraps a network whose output width equals its input width.
    pub fn from_network(network: Network) -> Result<Self> {
        if network.output_dim() != network.input_dim() {
            return Err(Error::InvalidArgument(format!(
                "encoder output width {} must equal input width {}",
                network.output_dim(),
                network.input_dim()
            )));
        }
        let bottleneck_layer = bottleneck_index(&network.spec().layer_sizes)?;
        Ok(Self {
            network,
            bottleneck_layer,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn into_network(self) -> Network {
        self.network
    }

    pub fn bottleneck_layer(&self) -> usize {
        self.bottleneck_layer
    }

    pub fn input_dim(&self) -> usize {
        self.network.input_dim()
    }

    pub fn feature_dim(&self) -> usize {
        self.network.spec().layer_sizes[self.bottleneck_layer]
    }

    /// Bottleneck activations of every row (`N × feature_dim`).
    pub fn extract_features(&self, data: &Matrix) -> Result<Matrix> {
        self.network.forward_to(data, self.bottleneck_layer)
    }

    /// Full encode–decode pass.
    pub fn reconstruct(&self, data: &Matrix) -> Result<Matrix> {
        self.network.predict(data)
    }
}

fn check_encoder_spec(train: &Dataset, spec: &NetworkSpec) -> Result<()> {
    spec.validate()?;
    let d = train.dim();
    if spec.input_dim() != d || spec.output_dim() != d {
        return Err(Error::InvalidArgument(format!(
            "encoder spec {} must start and end with the data dimension {d}",
            spec.describe()
        )));
    }
    bottleneck_index(&spec.layer_sizes).map(|_| ())
}

fn train_encoder(train: &Dataset, spec: &NetworkSpec, targets: &Matrix, cfg: &TrainConfig) -> Result<(EncoderModel, TrainLog)> {
    let mut net = Network::init(spec.clone())?;
    let log = net.train(train.x(), targets, cfg)?;
    Ok((EncoderModel::from_network(net)?, log))
}

/// Trains `spec` to map every training sample to its class template.
pub fn train_discriminative_encoder(
    train: &Dataset,
    spec: &NetworkSpec,
    templates: &TemplateSet,
    cfg: &TrainConfig,
) -> Result<(EncoderModel, TrainLog)> {
    check_encoder_spec(train, spec)?;
    let targets = make_targets(train, templates)?;
    train_encoder(train, spec, &targets, cfg)
}

/// Trains `spec` to reconstruct its own input.
pub fn train_autoencoder(train: &Dataset, spec: &NetworkSpec, cfg: &TrainConfig) -> Result<(EncoderModel, TrainLog)> {
    check_encoder_spec(train, spec)?;
    train_encoder(train, spec, train.x(), cfg)
}

pub fn extract_features(model: &EncoderModel, data: &Matrix) -> Result<Matrix> {
    model.extract_features(data)
}

#[derive(Serialize, Deserialize)]
struct TemplateEntry<T> {
    label: usize,
    name: String,
    template: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct TemplateFile<T> {
    dim: usize,
    classes: Vec<TemplateEntry<T>>,
}

/// JSON `{dim, classes: [{label, name, template}]}`.
pub fn templates_to_json(set: &TemplateSet) -> Result<String> {
    let file = TemplateFile {
        dim: set.dim,
        classes: set
            .templates
            .iter()
            .zip(&set.names)
            .enumerate()
            .map(|(label, (t, name))| TemplateEntry {
                label,
                name: name.clone(),
                template: t.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&file).map_err(|e| ModelFileError::Malformed(e.to_string()).into())
}

pub fn templates_from_json(text: &str) -> Result<TemplateSet> {
    let file: TemplateFile<Option<f64>> = serde_json::from_str(text).map_err(corrupt_json)?;
    let mut entries = file.classes;
    entries.sort_by_key(|e| e.label);
    if entries.iter().enumerate().any(|(i, e)| e.label != i) {
        return Err(ModelFileError::Malformed("template labels must be 0..C without gaps".into()).into());
    }
    let mut templates = Vec::with_capacity(entries.len());
    let mut names = Vec::with_capacity(entries.len());
    for e in entries {
        if e.template.len() != file.dim {
            return Err(ModelFileError::CorruptLength(format!(
                "template for label {} has {} values, expected {}",
                e.label,
                e.template.len(),
                file.dim
            ))
            .into());
        }
        templates.push(finite_values(e.template, "template")?);
        names.push(e.name);
    }
    TemplateSet::new(templates, names)
}

pub fn save_templates(set: &TemplateSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, templates_to_json(set)?).map_err(|e| Error::io(path, e))
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<TemplateSet> {
    let path = path.as_ref();
    templates_from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
