use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::ClassifierSpec;
use crate::encoders::{bottleneck_index, TemplateStrategy};
use crate::error::{Error, Result};
use crate::network::TrainConfig;

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// An IDX image/label pair, optionally with a separate predefined test pair.
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_images: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_labels: Option<PathBuf>,
    },
    /// `root/<class>/<image>.{pgm,png}` resized to `height × width`.
    ImageDir { root: PathBuf, height: usize, width: usize },
    Synthetic {
        classes: usize,
        per_class: usize,
        dim: usize,
        spread: f64,
        seed: u64,
    },
}

impl DatasetSource {
    /// Makes relative paths relative to `base` (usually the config file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            DatasetSource::Idx {
                images,
                labels,
                test_images,
                test_labels,
            } => {
                fix(images);
                fix(labels);
                test_images.iter_mut().for_each(fix);
                test_labels.iter_mut().for_each(fix);
            }
            DatasetSource::ImageDir { root, .. } => fix(root),
            DatasetSource::Synthetic { .. } => {}
        }
    }

    pub fn has_predefined_test(&self) -> bool {
        matches!(
            self,
            DatasetSource::Idx {
                test_images: Some(_),
                test_labels: Some(_),
                ..
            }
        )
    }
}

/// How train and test sets are formed. The shuffle seed is derived from the
/// experiment's master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitConfig {
    /// `n_train` samples of every class for training, the rest for testing.
    PerClass { n_train: usize },
    /// Fraction `p` of every class for training.
    Fraction { p: f64 },
    /// The source's own train/test files, optionally thinned to a stratified
    /// subset of at most this many samples per class.
    Predefined {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        train_per_class: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_per_class: Option<usize>,
    },
}

/// Feature extraction applied before classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reduction {
    /// Raw normalized inputs.
    InputSpace,
    Pca { k: usize },
    /// `layers` lists every layer after the input, e.g. `[225, 100, 36, 784]`.
    Autoencoder {
        layers: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
    DiscriminativeEncoder {
        layers: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
        #[serde(default)]
        templates: TemplateStrategy,
    },
}

impl Reduction {
    /// Short column label: IS, PCA, AE or DE.
    pub fn label(&self) -> &'static str {
        match self {
            Reduction::InputSpace => "IS",
            Reduction::Pca { .. } => "PCA",
            Reduction::Autoencoder { .. } => "AE",
            Reduction::DiscriminativeEncoder { .. } => "DE",
        }
    }

    /// Output width for inputs of width `input_dim`.
    pub fn feature_dim(&self, input_dim: usize) -> Result<usize> {
        match self {
            Reduction::InputSpace => Ok(input_dim),
            Reduction::Pca { k } => Ok(*k),
            Reduction::Autoencoder { layers, .. } | Reduction::DiscriminativeEncoder { layers, .. } => {
                let sizes = encoder_layer_sizes(input_dim, layers);
                Ok(sizes[bottleneck_index(&sizes)?])
            }
        }
    }

    /// Checks the reduction against the data shape before anything is trained.
    pub fn check(&self, input_dim: usize, n_train: usize) -> Result<()> {
        match self {
            Reduction::InputSpace => Ok(()),
            Reduction::Pca { k } => {
                let max_k = n_train.saturating_sub(1).min(input_dim);
                if *k == 0 || *k > max_k {
                    return Err(Error::Config(format!(
                        "PCA k = {k} must be in 1..={max_k} for {n_train} training samples of dimension {input_dim}"
                    )));
                }
                Ok(())
            }
            Reduction::Autoencoder { layers, train } | Reduction::DiscriminativeEncoder { layers, train, .. } => {
                if layers.last() != Some(&input_dim) {
                    return Err(Error::Config(format!(
                        "{} layers {layers:?} must end with the input width {input_dim}",
                        self.label()
                    )));
                }
                if layers.contains(&0) {
                    return Err(Error::Config(format!("{} layers {layers:?} contain a zero width", self.label())));
                }
                train.validate()?;
                bottleneck_index(&encoder_layer_sizes(input_dim, layers)).map(|_| ())
            }
        }
    }
}

pub(crate) fn encoder_layer_sizes(input_dim: usize, layers: &[usize]) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(layers.len() + 1);
    sizes.push(input_dim);
    sizes.extend_from_slice(layers);
    sizes
}

/// Downstream classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierConfig {
    Knn { k: usize },
    /// Sigmoid MLP with the given hidden widths and one output per class.
    Mlp {
        hidden: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
}

impl ClassifierConfig {
    pub fn label(&self) -> String {
        match self {
            ClassifierConfig::Knn { k } => format!("{k}-NN"),
            ClassifierConfig::Mlp { hidden, .. } => {
                let widths: Vec<String> = hidden.iter().map(usize::to_string).collect();
                format!("MLP[{}]", widths.join("-"))
            }
        }
    }

    pub fn check(&self, n_train: usize) -> Result<()> {
        match self {
            ClassifierConfig::Knn { k } => {
                if *k == 0 || *k > n_train {
                    return Err(Error::Config(format!("kNN k = {k} must be in 1..={n_train}")));
                }
                Ok(())
            }
            ClassifierConfig::Mlp { hidden, train } => {
                if hidden.contains(&0) {
                    return Err(Error::Config(format!("MLP hidden widths {hidden:?} contain a zero")));
                }
                train.validate()
            }
        }
    }

    pub(crate) fn classifier_spec(hidden: &[usize], init_seed: u64) -> ClassifierSpec {
        ClassifierSpec {
            hidden_sizes: hidden.to_vec(),
            init_seed,
        }
    }
}

/// One reduction + classifier cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset label used in reports.
    pub dataset: String,
    pub source: DatasetSource,
    pub split: SplitConfig,
    pub reduction: Reduction,
    pub classifier: ClassifierConfig,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file; relative data paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?;
        cfg.source.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the config's canonical JSON (object keys sorted, shortest round-trip reals).
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Several reductions sharing one dataset, split, classifier and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub dataset: String,
    pub source: DatasetSource,
    pub split: SplitConfig,
    pub reductions: Vec<Reduction>,
    pub classifier: ClassifierConfig,
    pub master_seed: u64,
    /// Fill the report's `seconds` column. Off by default so reports are reproducible byte for byte.
    #[serde(default)]
    pub timings: bool,
}

impl ComparisonConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?;
        cfg.source.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// The standalone experiment equivalent to cell `i`.
    pub fn cell(&self, i: usize) -> Option<ExperimentConfig> {
        self.reductions.get(i).map(|reduction| ExperimentConfig {
            dataset: self.dataset.clone(),
            source: self.source.clone(),
            split: self.split.clone(),
            reduction: reduction.clone(),
            classifier: self.classifier.clone(),
            master_seed: self.master_seed,
        })
    }
}
