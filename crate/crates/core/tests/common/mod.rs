//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use disc_encoder::numerics::{rand_uniform, SeededRng};
use disc_encoder::Matrix;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix given as rows.
/// Returns eigenvalues and eigenvectors (as columns of `vecs`) in no particular order.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// PCA by explicit loops: covariance with divisor N−1, Jacobi eigenpairs
/// sorted descending, largest-magnitude entry of each vector made positive.
pub fn pca_oracle(x: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len();
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            cov[i][j] = x.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1) as f64;
        }
    }
    let (vals, vecs) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let mut axes = Vec::new();
    let mut eig = Vec::new();
    for &c in order.iter().take(k) {
        let mut col: Vec<f64> = (0..d).map(|r| vecs[r][c]).collect();
        let mut pivot = 0;
        for i in 1..d {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        axes.push(col);
        eig.push(vals[c].max(0.0));
    }
    (eig, axes, mean)
}

/// kNN by sorting every distance, then counting votes in a map.
pub fn knn_oracle(points: &[Vec<f64>], labels: &[usize], k: usize, query: &[f64]) -> usize {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let nearest = &dist[..k];
    let mut counts = std::collections::BTreeMap::new();
    for &(_, i) in nearest {
        *counts.entry(labels[i]).or_insert(0usize) += 1;
    }
    let best = *counts.values().max().unwrap();
    // walk outward from the closest neighbor; the first class with the top count wins
    for &(_, i) in nearest {
        if counts[&labels[i]] == best {
            return labels[i];
        }
    }
    unreachable!()
}

pub fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    rand_uniform(rng, rows, cols, 0.0, 1.0).unwrap()
}

pub fn mnist_dir() -> std::path::PathBuf {
    match std::env::var_os("MNIST_DIR") {
        Some(dir) => dir.into(),
        None => std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"),
    }
}
