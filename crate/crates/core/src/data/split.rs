use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// How many samples of each class go to the training side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// Exactly `n_train` per class; the rest of each class is test.
    PerClassCount { n_train: usize },
    /// `round(p · class size)` per class, kept within `1..class size`.
    Fraction { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
}

impl SplitSpec {
    pub fn per_class(n_train: usize, seed: u64) -> Self {
        Self {
            mode: SplitMode::PerClassCount { n_train },
            seed,
        }
    }

    pub fn fraction(p: f64, seed: u64) -> Self {
        Self {
            mode: SplitMode::Fraction { p },
            seed,
        }
    }

    fn train_count(&self, class_size: usize, class_name: &str) -> Result<usize> {
        match self.mode {
            SplitMode::PerClassCount { n_train } => {
                if n_train == 0 || n_train >= class_size {
                    return Err(Error::InvalidArgument(format!(
                        "n_train = {n_train} must be in 1..{class_size} for class '{class_name}'"
                    )));
                }
                Ok(n_train)
            }
            SplitMode::Fraction { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidArgument(format!("split fraction must be in (0, 1), got {p}")));
                }
                if class_size < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "class '{class_name}' has {class_size} sample(s); a split needs at least 2"
                    )));
                }
                Ok(((p * class_size as f64).round() as usize).clamp(1, class_size - 1))
            }
        }
    }
}

/// Per-class seeded shuffle, then the first share of each class is train.
///
/// Classes are visited in id order with one generator seeded by `spec.seed`.
/// Both returned index lists are sorted ascending.
pub fn split_indices(dataset: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = SeededRng::new(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
        let n_train = spec.train_count(members.len(), &dataset.class_names()[class])?;
        rng.shuffle(&mut members);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset, spec)?;
    Ok((dataset.select(&train)?, dataset.select(&test)?))
}

/// Keeps `per_class` seeded-random samples of every class (rows stay in original order).
pub fn stratified_subset(dataset: &Dataset, per_class: usize, seed: u64) -> Result<Dataset> {
    let mut rng = SeededRng::new(seed);
    let mut keep = Vec::new();
    for (class, mut members) in dataset.class_indices().into_iter().enumerate() {
        if per_class == 0 || per_class > members.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {per_class} samples from class '{}' of size {}",
                dataset.class_names()[class],
                members.len()
            )));
        }
        rng.shuffle(&mut members);
        keep.extend_from_slice(&members[..per_class]);
    }
    keep.sort_unstable();
    dataset.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn grouped(classes: usize, per_class: usize) -> Dataset {
        let n = classes * per_class;
        let x = Matrix::new(n, 1, (0..n).map(|i| i as f64 / n as f64).collect()).unwrap();
        let y = (0..n).map(|i| i / per_class).collect();
        Dataset::new(x, y, Dataset::numeric_class_names(classes), None).unwrap()
    }

    #[test]
    fn frontal_face_split_sizes() {
        let (train, test) = split(&grouped(38, 64), &SplitSpec::per_class(48, 1)).unwrap();
        assert_eq!((train.len(), test.len()), (1824, 608));
    }

    #[test]
    fn taiwan_split_sizes() {
        let (train, test) = split(&grouped(90, 37), &SplitSpec::per_class(26, 1)).unwrap();
        assert_eq!((train.len(), test.len()), (2340, 990));
    }

    #[test]
    fn split_is_a_deterministic_partition() {
        let ds = grouped(4, 10);
        let spec = SplitSpec::fraction(0.7, 42);
        let (a_train, a_test) = split_indices(&ds, &spec).unwrap();
        let (b_train, b_test) = split_indices(&ds, &spec).unwrap();
        assert_eq!((&a_train, &a_test), (&b_train, &b_test));
        let mut all: Vec<usize> = a_train.iter().chain(&a_test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        assert_eq!(a_train.len(), 28);
    }

    #[test]
    fn n_train_too_large_names_the_class() {
        let ds = grouped(3, 5);
        let err = split(&ds, &SplitSpec::per_class(5, 0)).unwrap_err().to_string();
        assert!(err.contains("class '0'"), "{err}");
        assert!(split(&ds, &SplitSpec::fraction(1.0, 0)).is_err());
    }

    #[test]
    fn subset_takes_exactly_per_class() {
        let sub = stratified_subset(&grouped(3, 10), 4, 9).unwrap();
        assert_eq!(sub.len(), 12);
        assert!(sub.class_indices().iter().all(|c| c.len() == 4));
        assert!(stratified_subset(&grouped(3, 10), 11, 9).is_err());
    }
}
