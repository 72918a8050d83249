//! Python bindings. Matrices cross the boundary as lists of row lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use disc_encoder::baselines::{self, PcaModel};
use disc_encoder::bench::{self, ComparisonConfig, ExperimentConfig, ReportFormat};
use disc_encoder::classifiers::{self, ClassifierModel, ClassifierSpec};
use disc_encoder::data;
use disc_encoder::encoders::{self, EncoderModel, TemplateStrategy};
use disc_encoder::network::gradcheck::random_gradcheck;
use disc_encoder::network;
use disc_encoder::numerics::derive_seed;
use disc_encoder::{Activation, Error, Matrix, NetworkSpec};

create_exception!(disc_encoder, DiscEncoderError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Shape { .. }
        | Error::Length { .. }
        | Error::InvalidArgument(_)
        | Error::Empty(_)
        | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => DiscEncoderError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for disc_encoder::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("matrix needs at least one row"));
    }
    Matrix::from_rows(&rows).py_err()
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    name.parse().py_err()
}

/// Hyperparameters of momentum mini-batch gradient descent.
#[pyclass(name = "TrainConfig", module = "disc_encoder", from_py_object)]
#[derive(Clone)]
struct PyTrainConfig {
    inner: network::TrainConfig,
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (learning_rate=0.1, momentum=0.9, batch_size=32, max_epochs=500, target_mse=1e-4, shuffle_seed=0))]
    fn new(
        learning_rate: f64,
        momentum: f64,
        batch_size: usize,
        max_epochs: usize,
        target_mse: f64,
        shuffle_seed: u64,
    ) -> PyResult<Self> {
        let inner = network::TrainConfig {
            learning_rate,
            momentum,
            batch_size,
            max_epochs,
            target_mse,
            shuffle_seed,
        };
        inner.validate().py_err()?;
        Ok(Self { inner })
    }

    #[getter]
    fn learning_rate(&self) -> f64 {
        self.inner.learning_rate
    }

    #[getter]
    fn momentum(&self) -> f64 {
        self.inner.momentum
    }

    #[getter]
    fn batch_size(&self) -> usize {
        self.inner.batch_size
    }

    #[getter]
    fn max_epochs(&self) -> usize {
        self.inner.max_epochs
    }

    #[getter]
    fn target_mse(&self) -> f64 {
        self.inner.target_mse
    }

    #[getter]
    fn shuffle_seed(&self) -> u64 {
        self.inner.shuffle_seed
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn config_or_default(cfg: Option<PyTrainConfig>) -> network::TrainConfig {
    cfg.map(|c| c.inner).unwrap_or_default()
}

/// Labeled samples in [0, 1].
#[pyclass(name = "Dataset", module = "disc_encoder", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: data::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (x, labels, class_names=None, image_shape=None))]
    fn new(
        x: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Option<Vec<String>>,
        image_shape: Option<(usize, usize)>,
    ) -> PyResult<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let names = class_names.unwrap_or_else(|| data::Dataset::numeric_class_names(classes));
        let inner = data::Dataset::new(matrix(x)?, labels, names, image_shape).py_err()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load_idx(images: &str, labels: &str) -> PyResult<Self> {
        Ok(Self {
            inner: data::load_idx(images, labels).py_err()?,
        })
    }

    #[staticmethod]
    fn load_image_dir(root: &str, height: usize, width: usize) -> PyResult<Self> {
        Ok(Self {
            inner: data::load_image_dir(root, (height, width)).py_err()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (classes, per_class, dim, spread, seed=0))]
    fn synth_blobs(classes: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: data::synth_blobs(classes, per_class, dim, spread, seed).py_err()?,
        })
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.inner.x().to_rows()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(train, test)` with `n_train` samples of every class in train.
    #[pyo3(signature = (n_train, seed=0))]
    fn split_per_class(&self, n_train: usize, seed: u64) -> PyResult<(Self, Self)> {
        let (a, b) = data::split(&self.inner, &data::SplitSpec::per_class(n_train, seed)).py_err()?;
        Ok((Self { inner: a }, Self { inner: b }))
    }

    #[pyo3(signature = (p, seed=0))]
    fn split_fraction(&self, p: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (a, b) = data::split(&self.inner, &data::SplitSpec::fraction(p, seed)).py_err()?;
        Ok((Self { inner: a }, Self { inner: b }))
    }

    #[pyo3(signature = (per_class, seed=0))]
    fn stratified_subset(&self, per_class: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: data::stratified_subset(&self.inner, per_class, seed).py_err()?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, dim={}, classes={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.num_classes()
        )
    }
}

/// Fully connected network with per-layer activations.
#[pyclass(name = "Network", module = "disc_encoder")]
struct PyNetwork {
    inner: network::Network,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (layer_sizes, seed=0, hidden_activation="sigmoid", output_activation="sigmoid"))]
    fn new(layer_sizes: Vec<usize>, seed: u64, hidden_activation: &str, output_activation: &str) -> PyResult<Self> {
        let spec = NetworkSpec::new(layer_sizes)
            .with_seed(seed)
            .with_activations(parse_activation(hidden_activation)?, parse_activation(output_activation)?);
        Ok(Self {
            inner: network::Network::init(spec).py_err()?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: network::load_network(path).py_err()?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        network::save_network(&self.inner, path).py_err()
    }

    #[getter]
    fn layer_sizes(&self) -> Vec<usize> {
        self.inner.spec().layer_sizes.clone()
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.predict(&matrix(x)?).py_err()?.to_rows())
    }

    /// Activations of layer `layer` (0 is the input).
    fn forward_to(&self, x: Vec<Vec<f64>>, layer: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.forward_to(&matrix(x)?, layer).py_err()?.to_rows())
    }

    fn loss(&self, x: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.loss(&matrix(x)?, &matrix(targets)?).py_err()
    }

    /// Trains in place; returns the loss after every epoch.
    #[pyo3(signature = (x, targets, config=None))]
    fn train(&mut self, x: Vec<Vec<f64>>, targets: Vec<Vec<f64>>, config: Option<PyTrainConfig>) -> PyResult<Vec<f64>> {
        let log = self
            .inner
            .train(&matrix(x)?, &matrix(targets)?, &config_or_default(config))
            .py_err()?;
        Ok(log.epochs.iter().map(|e| e.mse).collect())
    }

    fn __repr__(&self) -> String {
        format!("Network({})", self.inner.spec().describe())
    }
}

/// Encoder/decoder network read out at its narrowest hidden layer.
#[pyclass(name = "EncoderModel", module = "disc_encoder")]
struct PyEncoderModel {
    inner: EncoderModel,
    final_mse: Option<f64>,
}

fn encoder_spec(input_dim: usize, layers: Vec<usize>, seed: u64) -> NetworkSpec {
    let mut sizes = vec![input_dim];
    sizes.extend(layers);
    NetworkSpec::new(sizes).with_seed(derive_seed(seed, "encoder-init"))
}

fn encoder_config(config: Option<PyTrainConfig>, seed: u64) -> network::TrainConfig {
    network::TrainConfig {
        shuffle_seed: derive_seed(seed, "encoder-shuffle"),
        ..config_or_default(config)
    }
}

fn template_strategy(exemplars: Option<Vec<usize>>) -> TemplateStrategy {
    match exemplars {
        Some(indices) => TemplateStrategy::CanonicalExemplar { indices },
        None => TemplateStrategy::ClassMean,
    }
}

#[pymethods]
impl PyEncoderModel {
    /// Discriminative encoder: every sample is trained toward its class template.
    ///
    /// `layers` lists the widths after the input, e.g. `[225, 100, 36, 784]`.
    /// `seed` is a master seed, derived the same way as in experiment configs.
    #[staticmethod]
    #[pyo3(signature = (dataset, layers, config=None, seed=0, exemplars=None))]
    fn train_discriminative(
        dataset: &PyDataset,
        layers: Vec<usize>,
        config: Option<PyTrainConfig>,
        seed: u64,
        exemplars: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let ds = &dataset.inner;
        let templates = encoders::build_templates(ds, &template_strategy(exemplars)).py_err()?;
        let spec = encoder_spec(ds.dim(), layers, seed);
        let (inner, log) =
            encoders::train_discriminative_encoder(ds, &spec, &templates, &encoder_config(config, seed)).py_err()?;
        Ok(Self {
            inner,
            final_mse: log.final_mse(),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dataset, layers, config=None, seed=0))]
    fn train_autoencoder(dataset: &PyDataset, layers: Vec<usize>, config: Option<PyTrainConfig>, seed: u64) -> PyResult<Self> {
        let ds = &dataset.inner;
        let spec = encoder_spec(ds.dim(), layers, seed);
        let (inner, log) = encoders::train_autoencoder(ds, &spec, &encoder_config(config, seed)).py_err()?;
        Ok(Self {
            inner,
            final_mse: log.final_mse(),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let net = network::load_network(path).py_err()?;
        Ok(Self {
            inner: EncoderModel::from_network(net).py_err()?,
            final_mse: None,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        network::save_network(self.inner.network(), path).py_err()
    }

    #[getter]
    fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }

    #[getter]
    fn bottleneck_layer(&self) -> usize {
        self.inner.bottleneck_layer()
    }

    /// Training-set loss after the last epoch (None for loaded models).
    #[getter]
    fn final_mse(&self) -> Option<f64> {
        self.final_mse
    }

    fn features(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.extract_features(&matrix(x)?).py_err()?.to_rows())
    }

    fn reconstruct(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.reconstruct(&matrix(x)?).py_err()?.to_rows())
    }
}

/// Class templates ("ideal inputs"), one row per class.
#[pyfunction]
#[pyo3(signature = (dataset, exemplars=None))]
fn build_templates(dataset: &PyDataset, exemplars: Option<Vec<usize>>) -> PyResult<Vec<Vec<f64>>> {
    let set = encoders::build_templates(&dataset.inner, &template_strategy(exemplars)).py_err()?;
    Ok(set.as_matrix().to_rows())
}

#[pyclass(name = "PcaModel", module = "disc_encoder")]
struct PyPcaModel {
    inner: PcaModel,
}

#[pymethods]
impl PyPcaModel {
    #[staticmethod]
    fn fit(x: Vec<Vec<f64>>, k: usize) -> PyResult<Self> {
        Ok(Self {
            inner: baselines::pca_fit(&matrix(x)?, k).py_err()?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: baselines::load_pca(path).py_err()?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        baselines::save_pca(&self.inner, path).py_err()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().to_vec()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// `D × k`, one principal axis per column.
    #[getter]
    fn components(&self) -> Vec<Vec<f64>> {
        self.inner.components().to_rows()
    }

    fn project(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.project(&matrix(x)?).py_err()?.to_rows())
    }

    fn reconstruct(&self, coords: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.reconstruct(&matrix(coords)?).py_err()?.to_rows())
    }
}

/// A fitted kNN or MLP classifier.
#[pyclass(name = "Classifier", module = "disc_encoder")]
struct PyClassifier {
    inner: ClassifierModel,
}

#[pymethods]
impl PyClassifier {
    #[staticmethod]
    #[pyo3(signature = (features, labels, k=3))]
    fn knn(features: Vec<Vec<f64>>, labels: Vec<usize>, k: usize) -> PyResult<Self> {
        let model = classifiers::KnnModel::new(matrix(features)?, labels, k).py_err()?;
        Ok(Self {
            inner: ClassifierModel::Knn(model),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (features, labels, hidden, config=None, seed=0))]
    fn mlp(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        hidden: Vec<usize>,
        config: Option<PyTrainConfig>,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = ClassifierSpec {
            hidden_sizes: hidden,
            init_seed: derive_seed(seed, "classifier-init"),
        };
        let cfg = network::TrainConfig {
            shuffle_seed: derive_seed(seed, "classifier-shuffle"),
            ..config_or_default(config)
        };
        let (net, _) = classifiers::train_mlp_classifier(&matrix(features)?, &labels, &spec, &cfg).py_err()?;
        Ok(Self {
            inner: ClassifierModel::Mlp(net),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ClassifierModel::load(path).py_err()?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).py_err()
    }

    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.inner.predict(&matrix(features)?).py_err()
    }
}

#[pyfunction]
fn accuracy(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    classifiers::accuracy(&pred, &truth).py_err()
}

/// Largest relative gradient error over `count` random small networks.
#[pyfunction]
#[pyo3(signature = (seed=0, count=20, eps=1e-5))]
fn gradcheck(seed: u64, count: usize, eps: f64) -> PyResult<f64> {
    Ok(random_gradcheck(seed, count, eps).py_err()?.max_relative_error)
}

/// Runs one experiment from TOML text and returns its result as a dict.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::from_toml(config_toml).py_err()?;
    let r = bench::run_experiment(&cfg).py_err()?;
    let d = PyDict::new(py);
    d.set_item("dataset", r.dataset)?;
    d.set_item("reduction", r.reduction)?;
    d.set_item("classifier", r.classifier)?;
    d.set_item("config_digest", r.config_digest)?;
    d.set_item("feature_dim", r.feature_dim)?;
    d.set_item("test_accuracy", r.test_accuracy)?;
    d.set_item("train_accuracy", r.train_accuracy)?;
    Ok(d)
}

/// Runs a comparison from TOML text; returns `(csv, markdown, errors)`.
#[pyfunction]
fn run_comparison(config_toml: &str) -> PyResult<(String, String, Vec<String>)> {
    let cfg = ComparisonConfig::from_toml(config_toml).py_err()?;
    let result = bench::run_comparison(&cfg).py_err()?;
    let errors = result.failures().map(|(r, e)| format!("{r}: {e}")).collect();
    let rows = result.rows(cfg.timings);
    if rows.is_empty() {
        return Ok((String::new(), String::new(), errors));
    }
    Ok((
        bench::emit_report(&rows, ReportFormat::Csv).py_err()?,
        bench::emit_report(&rows, ReportFormat::Markdown).py_err()?,
        errors,
    ))
}

#[pymodule(name = "disc_encoder")]
fn disc_encoder_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DiscEncoderError", m.py().get_type::<DiscEncoderError>())?;
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyEncoderModel>()?;
    m.add_class::<PyPcaModel>()?;
    m.add_class::<PyClassifier>()?;
    m.add_function(wrap_pyfunction!(build_templates, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_comparison, m)?)?;
    Ok(())
}
