use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::{euclidean_distance, Matrix};

/// Brute-force k-nearest-neighbor classifier under Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    points: Matrix,
    labels: Vec<usize>,
    k: usize,
}

impl KnnModel {
    pub fn new(points: Matrix, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != points.rows() {
            return Err(Error::Length {
                op: "KnnModel labels",
                lhs: labels.len(),
                rhs: points.rows(),
            });
        }
        if k == 0 || k > points.rows() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} must be in 1..={} (training points)",
                points.rows()
            )));
        }
        Ok(Self { points, labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Predicted class of every query row.
    ///
    /// Neighbors are ordered by distance, then by training row index. The vote
    /// winner is the most frequent class; among tied classes, the one that owns
    /// the nearest of the k neighbors wins.
    pub fn predict(&self, queries: &Matrix) -> Result<Vec<usize>> {
        if queries.cols() != self.points.cols() {
            return Err(Error::Shape {
                op: "knn_predict",
                lhs: queries.shape(),
                rhs: self.points.shape(),
            });
        }
        let n_classes = self.labels.iter().max().map_or(0, |m| m + 1);
        let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(self.points.rows());
        let mut votes = vec![0usize; n_classes];
        queries
            .iter_rows()
            .map(|q| {
                scratch.clear();
                for (i, p) in self.points.iter_rows().enumerate() {
                    scratch.push((euclidean_distance(q, p)?, i));
                }
                let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
                    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                };
                if self.k < scratch.len() {
                    scratch.select_nth_unstable_by(self.k - 1, by_distance);
                }
                let nearest = &mut scratch[..self.k];
                nearest.sort_unstable_by(by_distance);

                votes.iter_mut().for_each(|v| *v = 0);
                for &(_, i) in nearest.iter() {
                    votes[self.labels[i]] += 1;
                }
                let top = *votes.iter().max().expect("k >= 1");
                let winner = nearest
                    .iter()
                    .map(|&(_, i)| self.labels[i])
                    .find(|&c| votes[c] == top)
                    .expect("some neighbor carries the top vote");
                Ok(winner)
            })
            .collect()
    }
}

/// Convenience wrapper over [`KnnModel::predict`].
pub fn knn_predict(model: &KnnModel, queries: &Matrix) -> Result<Vec<usize>> {
    model.predict(queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_point_labels_everything() {
        let model = KnnModel::new(pts(&[&[0.0, 0.0]]), vec![4], 1).unwrap();
        let q = pts(&[&[1.0, 1.0], &[-3.0, 2.0]]);
        assert_eq!(model.predict(&q).unwrap(), vec![4, 4]);
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let model = KnnModel::new(pts(&[&[0.0], &[1.0], &[2.0]]), vec![0, 1, 2], 1).unwrap();
        assert_eq!(model.predict(&pts(&[&[1.0]])).unwrap(), vec![1]);
    }

    #[test]
    fn vote_tie_goes_to_class_of_nearest_neighbor() {
        // k=2, one neighbor of each class; class 1's point is nearer
        let model = KnnModel::new(pts(&[&[0.0], &[0.9]]), vec![0, 1], 2).unwrap();
        assert_eq!(model.predict(&pts(&[&[0.6]])).unwrap(), vec![1]);
    }

    #[test]
    fn distance_tie_prefers_lower_row_index() {
        let model = KnnModel::new(pts(&[&[-1.0], &[1.0]]), vec![5, 3], 1).unwrap();
        assert_eq!(model.predict(&pts(&[&[0.0]])).unwrap(), vec![5]);
    }

    #[test]
    fn majority_beats_nearest() {
        let model = KnnModel::new(pts(&[&[0.0], &[1.0], &[1.1]]), vec![0, 1, 1], 3).unwrap();
        assert_eq!(model.predict(&pts(&[&[0.0]])).unwrap(), vec![1]);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(KnnModel::new(pts(&[&[0.0]]), vec![0], 2).is_err());
        assert!(KnnModel::new(pts(&[&[0.0]]), vec![0], 0).is_err());
        assert!(KnnModel::new(pts(&[&[0.0]]), vec![0, 1], 1).is_err());
        let model = KnnModel::new(pts(&[&[0.0]]), vec![0], 1).unwrap();
        assert!(model.predict(&pts(&[&[0.0, 1.0]])).is_err());
    }
}
