use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

/// Gaussian blobs: each class gets a center drawn from `U[0.2, 0.8]^dim`
/// and `per_class` samples `center + spread·N(0, I)` clipped to `[0, 1]`.
///
/// Rows are grouped by class. All centers are drawn before any sample.
pub fn synth_blobs(classes: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 || dim < 2 || per_class == 0 {
        return Err(Error::InvalidArgument(format!(
            "synth_blobs needs classes >= 2, dim >= 2, per_class >= 1 (got {classes}, {dim}, {per_class})"
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidArgument(format!("spread must be >= 0, got {spread}")));
    }
    let mut rng = SeededRng::new(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.uniform(0.2, 0.8)).collect())
        .collect();
    let mut data = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            data.extend(center.iter().map(|&c| {
                if spread == 0.0 {
                    c
                } else {
                    (c + spread * rng.normal()).clamp(0.0, 1.0)
                }
            }));
            labels.push(class);
        }
    }
    let x = Matrix::new(labels.len(), dim, data)?;
    let names = (0..classes).map(|c| format!("class{c}")).collect();
    Dataset::new(x, labels, names, None)
}
