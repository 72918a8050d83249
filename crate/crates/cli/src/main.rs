//! `disc-encoder` command-line tool.
//!
//! Progress goes to stderr (`RUST_LOG` adjusts the level); machine output
//! (reports, written paths, metrics) goes to stdout. Exit codes: 0 success,
//! 1 usage error, 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use disc_encoder::baselines::{pca_fit, save_pca};
use disc_encoder::bench::{
    emit_report, load_source, run_comparison, ComparisonConfig, DatasetSource, FittedReduction, ReportFormat,
};
use disc_encoder::classifiers::{accuracy, train_mlp_classifier, ClassifierModel, ClassifierSpec, KnnModel};
use disc_encoder::data::{features_from_csv, features_to_csv, Dataset};
use disc_encoder::encoders::{
    build_templates, load_templates, save_templates, train_autoencoder, train_discriminative_encoder,
    TemplateStrategy,
};
use disc_encoder::network::gradcheck::random_gradcheck;
use disc_encoder::network::save_network;
use disc_encoder::numerics::derive_seed;
use disc_encoder::{Error, NetworkSpec, Result, TrainConfig};

#[derive(Parser)]
#[command(name = "disc-encoder", version, about = "Discriminative encoder feature learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a discriminative encoder (samples mapped to class templates).
    TrainEncoder {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        net: EncoderArgs,
        /// Template file from `make-templates`; class means of the data otherwise.
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Train an autoencoder (samples mapped to themselves).
    TrainAe {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        net: EncoderArgs,
    },
    /// Write bottleneck (or PCA) features of a dataset as CSV.
    Encode {
        /// Encoder network or PCA model file.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit PCA and write the model.
    PcaFit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a kNN or MLP classifier on a feature CSV.
    TrainClassifier {
        /// Feature CSV with header `f0,…,label`.
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum, default_value_t = ClassifierKind::Knn)]
        kind: ClassifierKind,
        /// Neighbors for kNN.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Hidden widths for the MLP, e.g. `75,50`.
        #[arg(long, value_delimiter = ',', default_value = "75,50")]
        hidden: Vec<usize>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy of a classifier on a feature CSV.
    Evaluate {
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Run every reduction of a comparison config and write the report.
    Compare {
        /// TOML comparison config.
        #[arg(long)]
        config: PathBuf,
        /// CSV report; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the markdown report here.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Fill the seconds column (makes reports run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Compare backprop gradients with central differences on random networks.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        /// Largest acceptable relative error.
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
    /// Build per-class templates and write them as JSON.
    MakeTemplates {
        #[command(flatten)]
        data: DataArgs,
        /// One training row index per class (canonical exemplars); class means otherwise.
        #[arg(long, value_delimiter = ',')]
        exemplars: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierKind {
    Knn,
    Mlp,
}

/// An IDX image/label pair, or a directory of per-class image folders.
#[derive(Args)]
struct DataArgs {
    /// IDX image file or image directory.
    #[arg(long)]
    data: PathBuf,
    /// IDX label file (required with an IDX image file).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Target size `HxW` for image directories.
    #[arg(long, value_parser = parse_shape, default_value = "30x30")]
    shape: (usize, usize),
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let source = if self.data.is_dir() {
            DatasetSource::ImageDir {
                root: self.data.clone(),
                height: self.shape.0,
                width: self.shape.1,
            }
        } else {
            let labels = self
                .labels
                .clone()
                .ok_or_else(|| Error::InvalidArgument("--labels is required with an IDX image file".into()))?;
            DatasetSource::Idx {
                images: self.data.clone(),
                labels,
                test_images: None,
                test_labels: None,
            }
        };
        let (data, _) = load_source(&source)?;
        log::info!("loaded {} samples of dimension {}", data.len(), data.dim());
        Ok(data)
    }
}

fn parse_shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or("expected HxW, e.g. 30x30")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(h)?, parse(w)?))
}

/// Training hyperparameters: `--config` TOML, then individual overrides.
#[derive(Args)]
struct TrainArgs {
    /// TOML file with TrainConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    target_mse: Option<f64>,
}

impl TrainArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrainConfig::load(path)?,
            None => TrainConfig::default(),
        };
        if let Some(v) = self.epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            cfg.momentum = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.target_mse {
            cfg.target_mse = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EncoderArgs {
    /// Layer widths after the input, e.g. `225,100,36,784`.
    #[arg(long, value_delimiter = ',', required = true)]
    layers: Vec<usize>,
    #[command(flatten)]
    train: TrainArgs,
    /// Master seed; initialization and batch order use the same derived seeds as `compare`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

impl EncoderArgs {
    fn spec_and_config(&self, input_dim: usize) -> Result<(NetworkSpec, TrainConfig)> {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(&self.layers);
        let spec = NetworkSpec::new(sizes).with_seed(derive_seed(self.seed, "encoder-init"));
        let cfg = TrainConfig {
            shuffle_seed: derive_seed(self.seed, "encoder-shuffle"),
            ..self.train.resolve()?
        };
        Ok((spec, cfg))
    }
}

fn print_path(path: &Path) {
    println!("{}", path.display());
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            print_path(p);
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::TrainEncoder { data, net, templates } => {
            let data = data.load()?;
            let templates = match templates {
                Some(path) => load_templates(path)?,
                None => build_templates(&data, &TemplateStrategy::ClassMean)?,
            };
            let (spec, cfg) = net.spec_and_config(data.dim())?;
            let (model, log) = train_discriminative_encoder(&data, &spec, &templates, &cfg)?;
            log::info!("trained {} for {} epochs, final mse {:?}", spec.describe(), log.epochs_run(), log.final_mse());
            save_network(model.network(), &net.out)?;
            print_path(&net.out);
        }
        Command::TrainAe { data, net } => {
            let data = data.load()?;
            let (spec, cfg) = net.spec_and_config(data.dim())?;
            let (model, log) = train_autoencoder(&data, &spec, &cfg)?;
            log::info!("trained {} for {} epochs, final mse {:?}", spec.describe(), log.epochs_run(), log.final_mse());
            save_network(model.network(), &net.out)?;
            print_path(&net.out);
        }
        Command::Encode { model, data, out } => {
            let reduction = FittedReduction::load(&model)?;
            let data = data.load()?;
            let features = reduction.transform(data.x())?;
            write_or_print(out.as_deref(), &features_to_csv(&features, data.labels())?)?;
        }
        Command::PcaFit { data, k, out } => {
            let data = data.load()?;
            let model = pca_fit(data.x(), k)?;
            save_pca(&model, &out)?;
            print_path(&out);
        }
        Command::TrainClassifier {
            features,
            kind,
            k,
            hidden,
            train,
            seed,
            out,
        } => {
            let (x, labels) = read_features(&features)?;
            let model = match kind {
                ClassifierKind::Knn => ClassifierModel::Knn(KnnModel::new(x, labels, k)?),
                ClassifierKind::Mlp => {
                    let spec = ClassifierSpec {
                        hidden_sizes: hidden,
                        init_seed: derive_seed(seed, "classifier-init"),
                    };
                    let cfg = TrainConfig {
                        shuffle_seed: derive_seed(seed, "classifier-shuffle"),
                        ..train.resolve()?
                    };
                    let (net, log) = train_mlp_classifier(&x, &labels, &spec, &cfg)?;
                    log::info!("classifier trained for {} epochs, final mse {:?}", log.epochs_run(), log.final_mse());
                    ClassifierModel::Mlp(net)
                }
            };
            model.save(&out)?;
            print_path(&out);
        }
        Command::Evaluate { classifier, features } => {
            let model = ClassifierModel::load(&classifier)?;
            let (x, labels) = read_features(&features)?;
            let pred = model.predict(&x)?;
            let acc = accuracy(&pred, &labels)?;
            let correct = pred.iter().zip(&labels).filter(|(a, b)| a == b).count();
            println!("accuracy,correct,total");
            println!("{acc},{correct},{}", labels.len());
        }
        Command::Compare {
            config,
            out,
            markdown,
            timings,
        } => {
            let cfg = ComparisonConfig::load(&config)?;
            let result = run_comparison(&cfg)?;
            let mut failed = false;
            for (reduction, err) in result.failures() {
                log::error!("{reduction}: {err}");
                failed = true;
            }
            let rows = result.rows(timings || cfg.timings);
            if rows.is_empty() {
                return Err(Error::Report("every cell of the comparison failed".into()));
            }
            write_or_print(out.as_deref(), &emit_report(&rows, ReportFormat::Csv)?)?;
            if let Some(md) = markdown {
                fs::write(&md, emit_report(&rows, ReportFormat::Markdown)?).map_err(|e| Error::Io {
                    path: md.clone(),
                    source: e,
                })?;
                print_path(&md);
            }
            if failed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Gradcheck {
            seed,
            count,
            eps,
            tolerance,
        } => {
            let report = random_gradcheck(seed, count, eps)?;
            log::info!(
                "checked {} parameters over {} networks",
                report.parameters_checked,
                report.networks
            );
            println!("{:e}", report.max_relative_error);
            if !(report.max_relative_error <= tolerance) {
                log::error!("max relative error exceeds {tolerance:e}");
                return Ok(ExitCode::from(2));
            }
        }
        Command::MakeTemplates { data, exemplars, out } => {
            let data = data.load()?;
            let strategy = match exemplars {
                Some(indices) => TemplateStrategy::CanonicalExemplar { indices },
                None => TemplateStrategy::ClassMean,
            };
            save_templates(&build_templates(&data, &strategy)?, &out)?;
            print_path(&out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_features(path: &Path) -> Result<(disc_encoder::Matrix, Vec<usize>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    features_from_csv(&text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
