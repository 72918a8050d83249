//! Labeled datasets: loading, splitting and synthetic fixtures.

mod features;
mod idx;
mod images;
mod split;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use features::{features_from_csv, features_to_csv};
pub use idx::{encode_idx_images, encode_idx_labels, load_idx, parse_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use images::{load_image_dir, read_gray_image, resize_bilinear};
pub use split::{split, split_indices, stratified_subset, SplitMode, SplitSpec};
pub use synth::synth_blobs;

/// `N × D` samples in `[0, 1]` with dense 0-based class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<usize>,
    class_names: Vec<String>,
    image_shape: Option<(usize, usize)>,
}

impl Dataset {
    /// Validates every invariant: values in `[0, 1]`, one label per row,
    /// labels dense over `0..class_names.len()`, and `h·w == D` when a shape is given.
    pub fn new(
        x: Matrix,
        y: Vec<usize>,
        class_names: Vec<String>,
        image_shape: Option<(usize, usize)>,
    ) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Length {
                op: "Dataset labels",
                lhs: y.len(),
                rhs: x.rows(),
            });
        }
        if let Some(bad) = x.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "dataset values must lie in [0, 1], found {bad}"
            )));
        }
        let classes = class_names.len();
        let mut seen = vec![false; classes];
        for &label in &y {
            if label >= classes {
                return Err(Error::InvalidArgument(format!(
                    "label {label} out of range for {classes} classes"
                )));
            }
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "class {missing} ('{}') has no samples; labels must be dense",
                class_names[missing]
            )));
        }
        if let Some((h, w)) = image_shape {
            if h * w != x.cols() {
                return Err(Error::InvalidArgument(format!(
                    "image shape {h}x{w} does not match {} features",
                    x.cols()
                )));
            }
        }
        Ok(Self {
            x,
            y,
            class_names,
            image_shape,
        })
    }

    /// Class names `"0"`, `"1"`, … for `classes` classes.
    pub fn numeric_class_names(classes: usize) -> Vec<String> {
        (0..classes).map(|c| c.to_string()).collect()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn image_shape(&self) -> Option<(usize, usize)> {
        self.image_shape
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Row indices of each class, in row order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (i, &label) in self.y.iter().enumerate() {
            out[label].push(i);
        }
        out
    }

    /// Rows at `indices` (in that order). Every class must still be present.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.x.select_rows(indices),
            indices.iter().map(|&i| self.y[i]).collect(),
            self.class_names.clone(),
            self.image_shape,
        )
    }
}
