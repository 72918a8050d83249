//! Principal component analysis on the sample covariance.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelFileError, Result};
use crate::jsonfile::{corrupt_json, finite_values};
use crate::numerics::Matrix;

/// Top-`k` principal axes of a training matrix.
///
/// `components` is `D × k` with orthonormal columns ordered by descending
/// eigenvalue; each column's largest-magnitude entry is positive (first such
/// entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Matrix,
    eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `(data − mean) · components`.
    pub fn project(&self, data: &Matrix) -> Result<Matrix> {
        if data.cols() != self.dim() {
            return Err(Error::Shape {
                op: "pca_project",
                lhs: data.shape(),
                rhs: self.components.shape(),
            });
        }
        data.sub_row_broadcast(&self.mean)?.matmul(&self.components)
    }

    /// `coords · componentsᵀ + mean`.
    pub fn reconstruct(&self, coords: &Matrix) -> Result<Matrix> {
        if coords.cols() != self.k() {
            return Err(Error::Shape {
                op: "pca_reconstruct",
                lhs: coords.shape(),
                rhs: self.components.shape(),
            });
        }
        coords
            .matmul(&self.components.transpose())?
            .add_row_broadcast(&self.mean)
    }
}

/// Fits PCA with covariance divisor `N − 1`. Requires `N ≥ 2` and `1 ≤ k ≤ min(N − 1, D)`.
pub fn pca_fit(train: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = train.shape();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 samples, got {n}")));
    }
    if k == 0 || k > (n - 1).min(d) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..={} for {n} samples of dimension {d}",
            (n - 1).min(d)
        )));
    }
    let mean = train.column_means();
    let centered = train.sub_row_broadcast(&mean)?;
    let cov = centered.t_matmul(&centered)?.scale(1.0 / (n - 1) as f64);

    let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, cov.as_slice()));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Matrix::zeros(d, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &src) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(src);
        let pivot = (0..d).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            components.set(i, col, sign * v[i]);
        }
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

pub fn pca_project(model: &PcaModel, data: &Matrix) -> Result<Matrix> {
    model.project(data)
}

pub fn pca_reconstruct(model: &PcaModel, coords: &Matrix) -> Result<Matrix> {
    model.reconstruct(coords)
}

#[derive(Serialize)]
struct PcaFileOut<'a> {
    dim: usize,
    k: usize,
    mean: &'a [f64],
    eigenvalues: &'a [f64],
    components: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct PcaFileIn {
    dim: usize,
    k: usize,
    mean: Vec<Option<f64>>,
    eigenvalues: Vec<Option<f64>>,
    components: Vec<Vec<Option<f64>>>,
}

/// JSON `{dim, k, mean, eigenvalues, components}`; `components` holds one array per axis.
pub fn pca_to_json(model: &PcaModel) -> Result<String> {
    let t = model.components.transpose();
    let file = PcaFileOut {
        dim: model.dim(),
        k: model.k(),
        mean: &model.mean,
        eigenvalues: &model.eigenvalues,
        components: t.to_rows(),
    };
    serde_json::to_string(&file).map_err(|e| ModelFileError::Malformed(e.to_string()).into())
}

pub fn pca_from_json(text: &str) -> Result<PcaModel> {
    let file: PcaFileIn = serde_json::from_str(text).map_err(corrupt_json)?;
    let (dim, k) = (file.dim, file.k);
    if file.mean.len() != dim
        || file.eigenvalues.len() != k
        || file.components.len() != k
        || file.components.iter().any(|c| c.len() != dim)
    {
        return Err(ModelFileError::CorruptLength(format!("PCA arrays do not match dim {dim}, k {k}")).into());
    }
    let mean = finite_values(file.mean, "PCA mean")?;
    let eigenvalues = finite_values(file.eigenvalues, "PCA eigenvalues")?;
    let mut axes = Vec::with_capacity(k * dim);
    for c in file.components {
        axes.extend(finite_values(c, "PCA components")?);
    }
    let components = Matrix::new(k, dim, axes)?.transpose();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

pub fn save_pca(model: &PcaModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pca_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_pca(path: impl AsRef<Path>) -> Result<PcaModel> {
    let path = path.as_ref();
    pca_from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
