use std::path::Path;

use disc_encoder::bench::{
    fit_classifier, fit_reduction, load_source, make_split, run_comparison, run_experiment, run_on_split,
    ClassifierConfig, ComparisonConfig, DatasetSource, Reduction, SplitConfig,
};
use disc_encoder::classifiers::accuracy;
use disc_encoder::data::{synth_blobs, Dataset};
use disc_encoder::TrainConfig;

fn short() -> TrainConfig {
    TrainConfig {
        max_epochs: 15,
        ..TrainConfig::default()
    }
}

fn comparison(classifier: ClassifierConfig) -> ComparisonConfig {
    ComparisonConfig {
        dataset: "blobs".into(),
        source: DatasetSource::Synthetic {
            classes: 3,
            per_class: 15,
            dim: 12,
            spread: 0.08,
            seed: 21,
        },
        split: SplitConfig::PerClass { n_train: 9 },
        reductions: vec![
            Reduction::InputSpace,
            Reduction::Pca { k: 3 },
            Reduction::Autoencoder {
                layers: vec![8, 4, 12],
                train: short(),
            },
            Reduction::DiscriminativeEncoder {
                layers: vec![8, 4, 12],
                train: short(),
                templates: Default::default(),
            },
        ],
        classifier,
        master_seed: 77,
        timings: false,
    }
}

fn mlp() -> ClassifierConfig {
    ClassifierConfig::Mlp {
        hidden: vec![6],
        train: short(),
    }
}

#[test]
fn identical_configs_give_identical_results() {
    for classifier in [ClassifierConfig::Knn { k: 3 }, mlp()] {
        let cmp = comparison(classifier);
        for i in 0..cmp.reductions.len() {
            let cfg = cmp.cell(i).unwrap();
            let a = run_experiment(&cfg).unwrap().without_timings();
            let b = run_experiment(&cfg.clone()).unwrap().without_timings();
            assert_eq!(a, b);
            assert_eq!(a.config_digest, cfg.digest());
        }
    }
}

#[test]
fn comparison_cells_match_standalone_experiments() {
    let cmp = comparison(mlp());
    let result = run_comparison(&cmp).unwrap();
    assert_eq!(result.failures().count(), 0);
    for (i, cell) in result.cells.iter().enumerate() {
        let standalone = run_experiment(&cmp.cell(i).unwrap()).unwrap().without_timings();
        assert_eq!(cell.result.as_ref().unwrap().without_timings(), standalone, "cell {i}");
    }
}

#[test]
fn input_space_cell_keeps_raw_features() {
    let cmp = comparison(ClassifierConfig::Knn { k: 3 });
    let result = run_comparison(&cmp).unwrap();
    let is = result.cells[0].result.as_ref().unwrap();
    assert_eq!(is.reduction, "IS");
    assert_eq!(is.feature_dim, 12);
}

#[test]
fn every_reduction_sees_the_same_split() {
    let cmp = comparison(ClassifierConfig::Knn { k: 1 });
    let split_of = || {
        let (data, test) = load_source(&cmp.source).unwrap();
        make_split(data, test, &cmp.split, cmp.master_seed).unwrap()
    };
    let (train, test) = split_of();
    for _ in 0..cmp.reductions.len() {
        let (t2, s2) = split_of();
        assert_eq!(t2.x(), train.x());
        assert_eq!(t2.labels(), train.labels());
        assert_eq!(s2.x(), test.x());
    }
    assert_eq!(train.len() + test.len(), 45);
}

fn scrambled(test: &Dataset) -> Dataset {
    let flipped = test.x().map(|v| 1.0 - v);
    let labels = test.labels().iter().map(|l| (l + 1) % test.num_classes()).collect();
    Dataset::new(flipped, labels, test.class_names().to_vec(), None).unwrap()
}

#[test]
fn test_split_never_reaches_the_fit_phases() {
    let cmp = comparison(mlp());
    let (data, test) = load_source(&cmp.source).unwrap();
    let (train, test) = make_split(data, test, &cmp.split, cmp.master_seed).unwrap();
    for i in 0..cmp.reductions.len() {
        let cfg = cmp.cell(i).unwrap();

        // fit with only the training split in hand, then bring the test split back
        let (reduction, rlog) = fit_reduction(&cfg.reduction, &train, cfg.master_seed).unwrap();
        let train_f = reduction.transform(train.x()).unwrap();
        let (clf, _) = fit_classifier(&cfg.classifier, &train_f, train.labels(), cfg.master_seed).unwrap();
        let test_f = reduction.transform(test.x()).unwrap();
        let manual = accuracy(&clf.predict(&test_f).unwrap(), test.labels()).unwrap();

        let full = run_experiment(&cfg).unwrap();
        assert_eq!(full.test_accuracy, manual, "cell {i}");
        assert_eq!(full.reduction_training.as_ref().map(|s| s.epochs), rlog.as_ref().map(|l| l.epochs.len()));

        // a different test split leaves everything learned untouched
        let other = run_on_split(&cfg, &train, &scrambled(&test)).unwrap();
        assert_eq!(other.train_accuracy, full.train_accuracy);
        assert_eq!(other.reduction_training, full.reduction_training);
        assert_eq!(other.classifier_training, full.classifier_training);
    }
}

#[test]
fn noiseless_blobs_are_classified_perfectly() {
    let mut cmp = comparison(ClassifierConfig::Knn { k: 1 });
    cmp.source = DatasetSource::Synthetic {
        classes: 4,
        per_class: 6,
        dim: 12,
        spread: 0.0,
        seed: 3,
    };
    cmp.split = SplitConfig::PerClass { n_train: 3 };
    for cell in run_comparison(&cmp).unwrap().cells {
        assert_eq!(cell.result.unwrap().test_accuracy, 1.0, "{}", cell.reduction);
    }
}

#[test]
fn separated_blobs_give_perfect_one_nn() {
    let ds = synth_blobs(2, 20, 10, 0.01, 8).unwrap();
    assert_eq!(ds.len(), 40);
    let mut cfg = comparison(ClassifierConfig::Knn { k: 1 }).cell(0).unwrap();
    cfg.source = DatasetSource::Synthetic {
        classes: 2,
        per_class: 20,
        dim: 10,
        spread: 0.01,
        seed: 8,
    };
    cfg.split = SplitConfig::PerClass { n_train: 10 };
    assert_eq!(run_experiment(&cfg).unwrap().test_accuracy, 1.0);
}

#[test]
fn errors_name_the_failing_phase() {
    let mut cfg = comparison(ClassifierConfig::Knn { k: 3 }).cell(1).unwrap();
    cfg.reduction = Reduction::Pca { k: 500 };
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("check"), "{err}");

    cfg.source = DatasetSource::Idx {
        images: "/no/such/images".into(),
        labels: "/no/such/labels".into(),
        test_images: None,
        test_labels: None,
    };
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("load") && err.contains("/no/such/images"), "{err}");
}

#[test]
fn shipped_configs_parse_and_pass_checks() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let expected = [
        ("mnist.toml", 784usize, vec!["IS", "PCA", "AE", "DE"], vec![784, 36, 36, 36]),
        ("mnist_small.toml", 784, vec!["IS", "PCA", "AE", "DE"], vec![784, 36, 36, 36]),
        ("yale_frontal.toml", 900, vec!["IS", "PCA", "AE", "DE"], vec![900, 64, 64, 64]),
        ("yale_all_pose.toml", 900, vec!["IS", "PCA", "AE", "DE"], vec![900, 64, 64, 64]),
        ("taiwan.toml", 768, vec!["IS", "PCA", "AE", "DE"], vec![768, 25, 25, 25]),
    ];
    for (file, d, labels, dims) in expected {
        let cfg = ComparisonConfig::load(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        if let DatasetSource::ImageDir { height, width, .. } = &cfg.source {
            assert_eq!(height * width, d, "{file}");
        }
        let got: Vec<&str> = cfg.reductions.iter().map(|r| r.label()).collect();
        assert_eq!(got, labels, "{file}");
        for (r, k) in cfg.reductions.iter().zip(dims) {
            assert_eq!(r.feature_dim(d).unwrap(), k, "{file}");
            r.check(d, 500).unwrap();
        }
        assert_eq!(cfg.classifier.label(), "3-NN");
    }
}
