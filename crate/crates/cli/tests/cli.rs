use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use disc_encoder::data::{encode_idx_images, encode_idx_labels};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_disc-encoder"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Three classes of 4×4 images, each class bright in its own band of rows.
fn write_idx_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let (n_per, side) = (8usize, 4usize);
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3u8 {
        for i in 0..n_per {
            for r in 0..side {
                for col in 0..side {
                    let base: u8 = if r == c as usize { 220 } else { 20 };
                    pixels.push(base.wrapping_add(((i * 7 + col * 3) % 25) as u8));
                }
            }
            labels.push(c);
        }
    }
    let images = dir.join("images.idx");
    let label_file = dir.join("labels.idx");
    fs::write(&images, encode_idx_images(side, side, &pixels)).unwrap();
    fs::write(&label_file, encode_idx_labels(&labels)).unwrap();
    (images, label_file)
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["gradcheck", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn help_succeeds() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in [
        "train-encoder",
        "train-ae",
        "encode",
        "pca-fit",
        "train-classifier",
        "evaluate",
        "compare",
        "gradcheck",
        "make-templates",
    ] {
        assert!(stdout(&out).contains(sub), "{sub} missing from help");
    }
}

#[test]
fn gradcheck_prints_error_and_passes() {
    let out = run(&["gradcheck", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err: f64 = stdout(&out).trim().parse().unwrap();
    assert!(err <= 1e-5, "{err}");
}

#[test]
fn gradcheck_fails_an_impossible_tolerance() {
    let out = run(&["gradcheck", "--seed", "7", "--tolerance", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = run(&["pca-fit", "--data", "/no/such/file", "--labels", "/no/such/labels", "--k", "2", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/no/such/file"), "{}", stderr(&out));
}

#[test]
fn encoder_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = write_idx_fixture(dir.path());
    let templates = dir.path().join("templates.json");
    let model = dir.path().join("de.json");
    let feats = dir.path().join("feats.csv");
    let clf = dir.path().join("knn.json");

    let out = run(&["make-templates", "--data", p(&images), "--labels", p(&labels), "--out", p(&templates)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), p(&templates));

    let out = run(&[
        "train-encoder", "--data", p(&images), "--labels", p(&labels), "--templates", p(&templates),
        "--layers", "8,3,16", "--epochs", "200", "--seed", "5", "--out", p(&model),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run(&["encode", "--model", p(&model), "--data", p(&images), "--labels", p(&labels), "--out", p(&feats)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&feats).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "f0,f1,f2,label");
    assert_eq!(lines.len(), 1 + 24);

    let out = run(&["train-classifier", "--features", p(&feats), "--kind", "knn", "--k", "1", "--out", p(&clf)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["evaluate", "--classifier", p(&clf), "--features", p(&feats)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some("accuracy,correct,total"));
    assert_eq!(lines.next(), Some("1,24,24"));
}

#[test]
fn autoencoder_pca_and_mlp_paths() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = write_idx_fixture(dir.path());
    let ae = dir.path().join("ae.json");
    let pca = dir.path().join("pca.json");
    let feats = dir.path().join("pca.csv");
    let mlp = dir.path().join("mlp.json");

    let out = run(&[
        "train-ae", "--data", p(&images), "--labels", p(&labels), "--layers", "6,16", "--epochs", "5", "--out", p(&ae),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["encode", "--model", p(&ae), "--data", p(&images), "--labels", p(&labels)]);
    assert!(stdout(&out).starts_with("f0,f1,f2,f3,f4,f5,label\n"));

    let out = run(&["pca-fit", "--data", p(&images), "--labels", p(&labels), "--k", "2", "--out", p(&pca)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["encode", "--model", p(&pca), "--data", p(&images), "--labels", p(&labels), "--out", p(&feats)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(fs::read_to_string(&feats).unwrap().starts_with("f0,f1,label\n"));

    let out = run(&[
        "train-classifier", "--features", p(&feats), "--kind", "mlp", "--hidden", "4", "--epochs", "50", "--out", p(&mlp),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["evaluate", "--classifier", p(&mlp), "--features", p(&feats)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn idx_data_requires_labels() {
    let dir = tempfile::tempdir().unwrap();
    let (images, _) = write_idx_fixture(dir.path());
    let out = run(&["pca-fit", "--data", p(&images), "--k", "2", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--labels"));
}

const COMPARE: &str = r#"
dataset = "blobs"
master_seed = 11

[source]
kind = "synthetic"
classes = 3
per_class = 12
dim = 10
spread = 0.05
seed = 2

[split]
mode = "per_class"
n_train = 8

[classifier]
kind = "knn"
k = 3

[[reductions]]
kind = "input_space"

[[reductions]]
kind = "pca"
k = 4

[[reductions]]
kind = "autoencoder"
layers = [6, 4, 10]
train = { max_epochs = 20 }

[[reductions]]
kind = "discriminative_encoder"
layers = [6, 4, 10]
train = { max_epochs = 20 }
"#;

#[test]
fn compare_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, COMPARE).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let md = dir.path().join("a.md");
    let out = run(&["compare", "--config", p(&cfg), "--out", p(&a), "--markdown", p(&md)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().collect::<Vec<_>>(), [p(&a), p(&md)]);
    let out = run(&["compare", "--config", p(&cfg), "--out", p(&b)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (a, b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset,reduction,classifier,feature_dim,test_accuracy,train_accuracy,seconds");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("blobs,IS,3-NN,10,"));
    assert!(lines[4].starts_with("blobs,DE,3-NN,4,"));
    assert!(fs::read_to_string(&md).unwrap().starts_with("| Dataset | Classifier | IS | PCA | AE | DE |"));
}

#[test]
fn compare_reports_failed_cells_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let broken = COMPARE.replace("k = 4", "k = 400");
    fs::write(&cfg, broken).unwrap();
    let out = run(&["compare", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4, "{text}");
    assert!(!text.contains(",PCA,"));
}

#[test]
fn compare_rejects_unknown_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, COMPARE.replace("master_seed = 11", "master_seed = 11\ncolour = 3")).unwrap();
    let out = run(&["compare", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn image_directories_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    for (class, value) in [("a", 40u8), ("b", 200u8)] {
        let class_dir = dir.path().join("faces").join(class);
        fs::create_dir_all(&class_dir).unwrap();
        for i in 0..3u8 {
            let mut pgm = b"P5\n6 6\n255\n".to_vec();
            pgm.extend(std::iter::repeat(value.saturating_add(i * 5)).take(36));
            fs::write(class_dir.join(format!("{i}.pgm")), pgm).unwrap();
        }
    }
    let pca = dir.path().join("pca.json");
    let out = run(&[
        "pca-fit", "--data", p(&dir.path().join("faces")), "--shape", "3x3", "--k", "2", "--out", p(&pca),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["encode", "--model", p(&pca), "--data", p(&dir.path().join("faces")), "--shape", "3x3"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().nth(4).unwrap().ends_with(",1"));
}
