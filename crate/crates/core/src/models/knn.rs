//! K-nearest-neighbour regression with Euclidean distance.

use alloc::vec::Vec;

use super::ModelError;
use crate::linalg::{squared_distance, Matrix};
use crate::math;

/// How neighbour targets are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Weighting {
    /// Plain mean.
    Uniform,
    /// Weights `1/dᵢ`, normalized.
    InverseDistance,
}

impl Weighting {
    /// Lower-case label.
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseDistance => "inverse_distance",
        }
    }
}

/// A neighbour: distance and training-row index.
pub type Neighbor = (f64, usize);

/// Stored training set and neighbour rule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KnnModel {
    /// Neighbour count.
    pub k: usize,
    /// Averaging rule.
    pub weighting: Weighting,
    /// Training inputs.
    pub train_x: Matrix,
    /// Training targets.
    pub train_y: Vec<f64>,
}

impl KnnModel {
    /// Store the training set.
    pub fn fit(x: &Matrix, y: &[f64], k: usize, weighting: Weighting) -> Result<Self, ModelError> {
        if x.rows() != y.len() {
            return Err(ModelError::LengthMismatch { rows: x.rows(), targets: y.len() });
        }
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if k == 0 || k > y.len() {
            return Err(ModelError::InvalidK { k, n: y.len() });
        }
        Ok(Self { k, weighting, train_x: x.clone(), train_y: y.to_vec() })
    }

    /// The `k` nearest training rows, ordered by distance then index.
    pub fn neighbors(&self, row: &[f64], k: usize) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = self
            .train_x
            .iter_rows()
            .enumerate()
            .map(|(i, xi)| (squared_distance(row, xi), i))
            .collect();
        let k = k.min(all.len());
        let cmp = |a: &Neighbor, b: &Neighbor| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < all.len() {
            all.select_nth_unstable_by(k, cmp);
            all.truncate(k);
        }
        all.sort_unstable_by(cmp);
        for n in all.iter_mut() {
            n.0 = math::sqrt(n.0);
        }
        all
    }

    /// Weighted average of the targets of `neighbors`.
    pub fn aggregate(&self, neighbors: &[Neighbor], weighting: Weighting) -> f64 {
        aggregate(&self.train_y, neighbors, weighting)
    }

    /// Prediction for one row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let nb = self.neighbors(row, self.k);
        self.aggregate(&nb, self.weighting)
    }
}

/// Average `targets` over `neighbors` under `weighting`. With inverse-distance
/// weights, any exact match short-circuits to the mean of the exact matches.
pub fn aggregate(targets: &[f64], neighbors: &[Neighbor], weighting: Weighting) -> f64 {
    match weighting {
        Weighting::Uniform => neighbors.iter().map(|&(_, i)| targets[i]).sum::<f64>() / neighbors.len() as f64,
        Weighting::InverseDistance => {
            let exact: Vec<f64> = neighbors.iter().filter(|n| n.0 == 0.0).map(|&(_, i)| targets[i]).collect();
            if !exact.is_empty() {
                return math::mean(&exact);
            }
            let (num, den) = neighbors
                .iter()
                .fold((0.0, 0.0), |(num, den), &(d, i)| (num + targets[i] / d, den + 1.0 / d));
            num / den
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<f64>) {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0]]);
        (x, alloc::vec![1.0, 2.0, 3.0, 4.0])
    }

    #[test]
    fn k1_returns_matching_target() {
        let (x, y) = toy();
        let m = KnnModel::fit(&x, &y, 1, Weighting::Uniform).unwrap();
        for (row, want) in x.iter_rows().zip(&y) {
            assert_eq!(m.predict_row(row), *want);
        }
    }

    #[test]
    fn k_equals_n_uniform_is_global_mean() {
        let (x, y) = toy();
        let m = KnnModel::fit(&x, &y, 4, Weighting::Uniform).unwrap();
        assert_eq!(m.predict_row(&[10.0, -4.0]), 2.5);
    }

    #[test]
    fn inverse_distance_by_hand() {
        // query (0.5, 0.5): d0 = d1 = √0.5, d2 = √2.5, d3 = √12.5.
        // K = 2 picks rows 0 and 1 with equal weight → (1 + 2) / 2.
        let (x, y) = toy();
        let m = KnnModel::fit(&x, &y, 2, Weighting::InverseDistance).unwrap();
        assert!((m.predict_row(&[0.5, 0.5]) - 1.5).abs() < 1e-15);
        // query (0, 1): d0 = 1, d2 = 1, d1 = √2. K = 2 → rows 0 and 2 → (1 + 3)/2.
        assert!((m.predict_row(&[0.0, 1.0]) - 2.0).abs() < 1e-15);
        // query (0.2, 0): d0 = 0.2, d1 = 0.8 → (1/0.2 + 2/0.8) / (1/0.2 + 1/0.8) = 7.5 / 6.25.
        assert!((m.predict_row(&[0.2, 0.0]) - 1.2).abs() < 1e-14);
    }

    #[test]
    fn exact_match_uses_matching_targets() {
        let x = Matrix::from_rows(&[[0.0], [0.0], [1.0]]);
        let m = KnnModel::fit(&x, &[2.0, 4.0, 100.0], 3, Weighting::InverseDistance).unwrap();
        assert_eq!(m.predict_row(&[0.0]), 3.0);
    }

    #[test]
    fn invalid_k_and_empty_set() {
        let (x, y) = toy();
        assert_eq!(KnnModel::fit(&x, &y, 0, Weighting::Uniform), Err(ModelError::InvalidK { k: 0, n: 4 }));
        assert_eq!(KnnModel::fit(&x, &y, 5, Weighting::Uniform), Err(ModelError::InvalidK { k: 5, n: 4 }));
        let empty = Matrix::zeros(0, 2);
        assert_eq!(KnnModel::fit(&empty, &[], 1, Weighting::Uniform), Err(ModelError::EmptyTrainingSet));
    }
}
