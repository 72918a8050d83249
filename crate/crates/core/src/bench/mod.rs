//! Declarative experiments: load, split, reduce, classify, report.
//!
//! Every random choice in an experiment draws from a sub-seed
//! `derive_seed(master_seed, role)`. Roles:
//!
//! | role                 | used for                                  |
//! |----------------------|-------------------------------------------|
//! | `split`              | per-class shuffle of `per_class`/`fraction` splits |
//! | `subset-train`       | thinning a predefined training file       |
//! | `subset-test`        | thinning a predefined test file           |
//! | `encoder-init`       | AE/DE weight initialization               |
//! | `encoder-shuffle`    | AE/DE mini-batch order                    |
//! | `classifier-init`    | MLP classifier weight initialization      |
//! | `classifier-shuffle` | MLP classifier mini-batch order           |
//!
//! AE and DE share their roles, so in one comparison both start from the
//! same weights and see the same batch order. The `shuffle_seed` field of a
//! `TrainConfig` inside an experiment config is ignored.
//!
//! Reductions and classifiers are fit on the training split only.

mod config;
mod report;

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{pca_fit, pca_from_json, PcaModel};
use crate::classifiers::{accuracy, train_mlp_classifier, ClassifierModel, KnnModel};
use crate::data::{load_idx, load_image_dir, split, stratified_subset, synth_blobs, Dataset, SplitSpec};
use crate::encoders::{build_templates, train_autoencoder, train_discriminative_encoder, EncoderModel};
use crate::error::{Error, Result};
use crate::network::{network_from_json, NetworkSpec, TrainConfig, TrainLog};
use crate::numerics::{derive_seed, Matrix};

pub use config::{ClassifierConfig, ComparisonConfig, DatasetSource, ExperimentConfig, Reduction, SplitConfig};
pub use report::{emit_report, parse_report, ReportFormat, ReportRow};

/// Wall-clock time of one pipeline phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTime {
    pub phase: String,
    pub seconds: f64,
}

/// Condensed training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs: usize,
    pub final_mse: f64,
}

impl TrainSummary {
    fn of(log: &TrainLog) -> Self {
        Self {
            epochs: log.epochs_run(),
            final_mse: log.final_mse().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub reduction: String,
    pub classifier: String,
    pub config_digest: String,
    pub feature_dim: usize,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub phases: Vec<PhaseTime>,
    pub reduction_training: Option<TrainSummary>,
    pub classifier_training: Option<TrainSummary>,
}

impl ExperimentResult {
    pub fn total_seconds(&self) -> f64 {
        self.phases.iter().map(|p| p.seconds).sum()
    }

    /// Copy with every timing zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        out.phases.iter_mut().for_each(|p| p.seconds = 0.0);
        out
    }
}

/// One cell of a comparison: the result, or the error that stopped it.
#[derive(Debug)]
pub struct CellOutcome {
    pub reduction: String,
    pub result: Result<ExperimentResult>,
}

#[derive(Debug)]
pub struct ComparisonResult {
    pub cells: Vec<CellOutcome>,
}

impl ComparisonResult {
    pub fn successes(&self) -> impl Iterator<Item = &ExperimentResult> {
        self.cells.iter().filter_map(|c| c.result.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Error)> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().err().map(|e| (c.reduction.as_str(), e)))
    }

    /// Report rows of the successful cells, in input order.
    pub fn rows(&self, timings: bool) -> Vec<ReportRow> {
        self.successes().map(|r| ReportRow::from_result(r, timings)).collect()
    }
}

struct Timer {
    phases: Vec<PhaseTime>,
}

impl Timer {
    fn run<T>(&mut self, phase: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_phase(phase));
        self.phases.push(PhaseTime {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        log::info!("{phase} done in {:.2}s", start.elapsed().as_secs_f64());
        out
    }
}

/// Samples of a source, plus its predefined test set if it has one.
pub fn load_source(source: &DatasetSource) -> Result<(Dataset, Option<Dataset>)> {
    match source {
        DatasetSource::Idx {
            images,
            labels,
            test_images,
            test_labels,
        } => {
            let train = load_idx(images, labels)?;
            let test = match (test_images, test_labels) {
                (Some(i), Some(l)) => Some(load_idx(i, l)?),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(
                        "test_images and test_labels must be given together".into(),
                    ))
                }
            };
            Ok((train, test))
        }
        DatasetSource::ImageDir { root, height, width } => Ok((load_image_dir(root, (*height, *width))?, None)),
        DatasetSource::Synthetic {
            classes,
            per_class,
            dim,
            spread,
            seed,
        } => Ok((synth_blobs(*classes, *per_class, *dim, *spread, *seed)?, None)),
    }
}

/// Forms the train and test sets.
pub fn make_split(
    data: Dataset,
    predefined_test: Option<Dataset>,
    split_cfg: &SplitConfig,
    master_seed: u64,
) -> Result<(Dataset, Dataset)> {
    let seed = derive_seed(master_seed, "split");
    match (split_cfg, predefined_test) {
        (SplitConfig::PerClass { n_train }, None) => split(&data, &SplitSpec::per_class(*n_train, seed)),
        (SplitConfig::Fraction { p }, None) => split(&data, &SplitSpec::fraction(*p, seed)),
        (SplitConfig::Predefined { .. }, None) => Err(Error::Config(
            "a predefined split needs a source with test_images and test_labels".into(),
        )),
        (
            SplitConfig::Predefined {
                train_per_class,
                test_per_class,
            },
            Some(test),
        ) => {
            if test.class_names() != data.class_names() {
                return Err(Error::Config(format!(
                    "train classes {:?} and test classes {:?} differ",
                    data.class_names(),
                    test.class_names()
                )));
            }
            let thin = |d: Dataset, cap: &Option<usize>, role: &str| match cap {
                Some(n) => stratified_subset(&d, *n, derive_seed(master_seed, role)),
                None => Ok(d),
            };
            Ok((
                thin(data, train_per_class, "subset-train")?,
                thin(test, test_per_class, "subset-test")?,
            ))
        }
        (_, Some(_)) => Err(Error::Config(
            "the source has a predefined test set; use the predefined split mode".into(),
        )),
    }
}

/// A reduction fit on training data.
#[derive(Debug, Clone)]
pub enum FittedReduction {
    Identity,
    Pca(PcaModel),
    Encoder(EncoderModel),
}

impl FittedReduction {
    /// Reads an encoder network file or a PCA model file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        // network files are versioned, PCA files carry their components
        let looks_like_pca = serde_json::from_str::<serde_json::Value>(&text)
            .map(|v| v.get("components").is_some())
            .unwrap_or(false);
        if looks_like_pca {
            Ok(FittedReduction::Pca(pca_from_json(&text)?))
        } else {
            Ok(FittedReduction::Encoder(EncoderModel::from_network(network_from_json(&text)?)?))
        }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            FittedReduction::Identity => Ok(x.clone()),
            FittedReduction::Pca(m) => m.project(x),
            FittedReduction::Encoder(m) => m.extract_features(x),
        }
    }
}

fn seeded(cfg: &TrainConfig, master_seed: u64, role: &str) -> TrainConfig {
    TrainConfig {
        shuffle_seed: derive_seed(master_seed, role),
        ..cfg.clone()
    }
}

/// Fits `reduction` to `train` alone.
pub fn fit_reduction(
    reduction: &Reduction,
    train: &Dataset,
    master_seed: u64,
) -> Result<(FittedReduction, Option<TrainLog>)> {
    reduction.check(train.dim(), train.len())?;
    let init_seed = derive_seed(master_seed, "encoder-init");
    match reduction {
        Reduction::InputSpace => Ok((FittedReduction::Identity, None)),
        Reduction::Pca { k } => Ok((FittedReduction::Pca(pca_fit(train.x(), *k)?), None)),
        Reduction::Autoencoder { layers, train: cfg } => {
            let spec = NetworkSpec::new(config::encoder_layer_sizes(train.dim(), layers)).with_seed(init_seed);
            let (model, log) = train_autoencoder(train, &spec, &seeded(cfg, master_seed, "encoder-shuffle"))?;
            Ok((FittedReduction::Encoder(model), Some(log)))
        }
        Reduction::DiscriminativeEncoder {
            layers,
            train: cfg,
            templates,
        } => {
            let spec = NetworkSpec::new(config::encoder_layer_sizes(train.dim(), layers)).with_seed(init_seed);
            let templates = build_templates(train, templates)?;
            let (model, log) =
                train_discriminative_encoder(train, &spec, &templates, &seeded(cfg, master_seed, "encoder-shuffle"))?;
            Ok((FittedReduction::Encoder(model), Some(log)))
        }
    }
}

pub fn fit_classifier(
    classifier: &ClassifierConfig,
    features: &Matrix,
    labels: &[usize],
    master_seed: u64,
) -> Result<(ClassifierModel, Option<TrainLog>)> {
    classifier.check(features.rows())?;
    match classifier {
        ClassifierConfig::Knn { k } => Ok((
            ClassifierModel::Knn(KnnModel::new(features.clone(), labels.to_vec(), *k)?),
            None,
        )),
        ClassifierConfig::Mlp { hidden, train } => {
            let spec = ClassifierConfig::classifier_spec(hidden, derive_seed(master_seed, "classifier-init"));
            let (net, log) =
                train_mlp_classifier(features, labels, &spec, &seeded(train, master_seed, "classifier-shuffle"))?;
            Ok((ClassifierModel::Mlp(net), Some(log)))
        }
    }
}

/// Runs the reduce → classify → evaluate phases on an existing split.
pub fn run_on_split(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<ExperimentResult> {
    let mut timer = Timer { phases: Vec::new() };
    run_phases(cfg, train, test, &mut timer)
}

fn run_phases(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset, timer: &mut Timer) -> Result<ExperimentResult> {
    timer.run("check", || {
        if test.is_empty() {
            return Err(Error::Empty("test split"));
        }
        if test.dim() != train.dim() {
            return Err(Error::Config(format!(
                "train dimension {} differs from test dimension {}",
                train.dim(),
                test.dim()
            )));
        }
        cfg.reduction.check(train.dim(), train.len())?;
        cfg.classifier.check(train.len())
    })?;
    let (reduction, reduction_log) = timer.run("reduce", || fit_reduction(&cfg.reduction, train, cfg.master_seed))?;
    let (train_f, test_f) = timer.run("transform", || {
        Ok((reduction.transform(train.x())?, reduction.transform(test.x())?))
    })?;
    let (classifier, classifier_log) = timer.run("classify", || {
        fit_classifier(&cfg.classifier, &train_f, train.labels(), cfg.master_seed)
    })?;
    let (test_accuracy, train_accuracy) = timer.run("evaluate", || {
        Ok((
            accuracy(&classifier.predict(&test_f)?, test.labels())?,
            accuracy(&classifier.predict(&train_f)?, train.labels())?,
        ))
    })?;
    Ok(ExperimentResult {
        dataset: cfg.dataset.clone(),
        reduction: cfg.reduction.label().to_string(),
        classifier: cfg.classifier.label(),
        config_digest: cfg.digest(),
        feature_dim: train_f.cols(),
        test_accuracy,
        train_accuracy,
        phases: std::mem::take(&mut timer.phases),
        reduction_training: reduction_log.as_ref().map(TrainSummary::of),
        classifier_training: classifier_log.as_ref().map(TrainSummary::of),
    })
}

/// Runs one experiment end to end. Errors carry the name of the failing phase.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut timer = Timer { phases: Vec::new() };
    let (data, test) = timer.run("load", || load_source(&cfg.source))?;
    let (train, test) = timer.run("split", || make_split(data, test, &cfg.split, cfg.master_seed))?;
    run_phases(cfg, &train, &test, &mut timer)
}

/// Runs every reduction on one shared split. A failing cell is recorded and
/// the remaining cells still run; only load and split errors abort.
pub fn run_comparison(cfg: &ComparisonConfig) -> Result<ComparisonResult> {
    let mut shared = Timer { phases: Vec::new() };
    let (data, test) = shared.run("load", || load_source(&cfg.source))?;
    let (train, test) = shared.run("split", || make_split(data, test, &cfg.split, cfg.master_seed))?;
    log::info!("split: {} train / {} test samples", train.len(), test.len());
    let cells = (0..cfg.reductions.len())
        .map(|i| {
            let cell = cfg.cell(i).expect("index in range");
            log::info!("cell {}: {}", i, cell.reduction.label());
            let mut timer = Timer {
                phases: shared.phases.clone(),
            };
            CellOutcome {
                reduction: cell.reduction.label().to_string(),
                result: run_phases(&cell, &train, &test, &mut timer),
            }
        })
        .collect();
    Ok(ComparisonResult { cells })
}
