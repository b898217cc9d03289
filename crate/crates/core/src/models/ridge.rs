//! Ridge regression in closed form.

use alloc::vec::Vec;

use super::ModelError;
use crate::features::FeatureMatrix;
use crate::linalg::{dot, Cholesky, Matrix};

/// How the intercept is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intercept {
    /// Plain `(XᵀX + λI)⁻¹ Xᵀy`, no intercept.
    None,
    /// Columns and target centered before the solve; the intercept is not penalized.
    Centered,
}

/// Fitted ridge coefficients.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RidgeModel {
    /// Slope coefficients β.
    pub beta: Vec<f64>,
    /// Intercept (zero without centering).
    pub intercept: f64,
    /// Regularization λ.
    pub lambda: f64,
}

impl RidgeModel {
    /// Solve `(XᵀX + λI) β = Xᵀy` with a Cholesky factorization.
    pub fn fit(x: &Matrix, y: &[f64], lambda: f64, intercept: Intercept) -> Result<Self, ModelError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(ModelError::InvalidHyperparameter("ridge lambda must be finite and >= 0"));
        }
        if x.rows() != y.len() {
            return Err(ModelError::LengthMismatch { rows: x.rows(), targets: y.len() });
        }
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let n = y.len() as f64;
        let p = x.cols();
        let (design, target, x_mean, y_mean) = match intercept {
            Intercept::None => (x.clone(), y.to_vec(), alloc::vec![0.0; p], 0.0),
            Intercept::Centered => {
                let mut xm = alloc::vec![0.0; p];
                for r in x.iter_rows() {
                    for (m, v) in xm.iter_mut().zip(r) {
                        *m += v;
                    }
                }
                xm.iter_mut().for_each(|m| *m /= n);
                let ym = y.iter().sum::<f64>() / n;
                let mut xc = x.clone();
                for i in 0..xc.rows() {
                    for (v, m) in xc.row_mut(i).iter_mut().zip(&xm) {
                        *v -= m;
                    }
                }
                (xc, y.iter().map(|v| v - ym).collect(), xm, ym)
            }
        };
        let mut a = design.gram();
        a.add_diagonal(lambda);
        let rhs = design.tr_matvec(&target);
        let ch = Cholesky::factor(a).map_err(|_| ModelError::SingularSystem)?;
        let beta = ch.solve(&rhs);
        let intercept = y_mean - dot(&x_mean, &beta);
        Ok(Self { beta, intercept, lambda })
    }

    /// Prediction for one row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + dot(row, &self.beta)
    }
}

/// Ridge with an unpenalized intercept on a standardized feature matrix.
pub fn ridge_fit(fm: &FeatureMatrix, lambda: f64) -> Result<RidgeModel, ModelError> {
    RidgeModel::fit(&fm.x, &fm.y, lambda, Intercept::Centered)
}

/// Effective degrees of freedom `tr(X (XᵀX + λI)⁻¹ Xᵀ)`.
pub fn ridge_df(x: &Matrix, lambda: f64) -> Result<f64, ModelError> {
    if !(lambda >= 0.0) {
        return Err(ModelError::InvalidHyperparameter("ridge lambda must be >= 0"));
    }
    // tr(X A⁻¹ Xᵀ) = tr(A⁻¹ XᵀX) with A = XᵀX + λI.
    let g = x.gram();
    let mut a = g.clone();
    a.add_diagonal(lambda);
    let ch = Cholesky::factor(a).map_err(|_| ModelError::SingularSystem)?;
    let p = g.cols();
    let mut trace = 0.0;
    for j in 0..p {
        let col = g.column(j);
        trace += ch.solve(&col)[j];
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> (Matrix, Vec<f64>) {
        let x = Matrix::from_rows(&[
            [1.0, 0.2, -0.5],
            [0.3, 1.1, 0.4],
            [-0.7, 0.5, 1.3],
            [0.9, -1.2, 0.1],
            [0.0, 0.8, -0.9],
            [1.5, 0.3, 0.7],
        ]);
        let y = alloc::vec![1.0, 2.0, 0.5, -1.0, 0.7, 2.2];
        (x, y)
    }

    #[test]
    fn lambda_zero_is_least_squares() {
        let (x, y) = design();
        let ridge = RidgeModel::fit(&x, &y, 0.0, Intercept::None).unwrap();
        let ls = crate::linalg::lstsq(&x, &y).unwrap();
        for (a, b) in ridge.beta.iter().zip(&ls.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_equation_residual_is_tiny() {
        let (x, y) = design();
        let m = RidgeModel::fit(&x, &y, 0.3, Intercept::None).unwrap();
        let mut lhs = x.gram().matvec(&m.beta);
        for (l, b) in lhs.iter_mut().zip(&m.beta) {
            *l += 0.3 * b;
        }
        let rhs = x.tr_matvec(&y);
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() < 1e-10);
        }
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let (x, y) = design();
        let m = RidgeModel::fit(&x, &y, 1e12, Intercept::None).unwrap();
        assert!(dot(&m.beta, &m.beta).sqrt() < 1e-10);
    }

    #[test]
    fn rank_deficient_without_penalty_is_singular() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        let err = RidgeModel::fit(&x, &[1.0, 2.0, 3.0], 0.0, Intercept::None).unwrap_err();
        assert_eq!(err, ModelError::SingularSystem);
        assert!(RidgeModel::fit(&x, &[1.0, 2.0, 3.0], 0.1, Intercept::None).is_ok());
    }

    #[test]
    fn centered_fit_recovers_intercept() {
        let (x, _) = design();
        let y: Vec<f64> = x.iter_rows().map(|r| 5.0 + 2.0 * r[0] - r[1] + 0.5 * r[2]).collect();
        let m = RidgeModel::fit(&x, &y, 0.0, Intercept::Centered).unwrap();
        assert!((m.intercept - 5.0).abs() < 1e-10);
        for (b, want) in m.beta.iter().zip([2.0, -1.0, 0.5]) {
            assert!((b - want).abs() < 1e-10);
        }
    }

    #[test]
    fn df_limits() {
        let (x, _) = design();
        assert!((ridge_df(&x, 0.0).unwrap() - 3.0).abs() < 1e-10);
        assert!(ridge_df(&x, 1e12).unwrap() < 1e-9);
        let orth = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        for lambda in [0.0, 0.5, 3.0, 100.0] {
            assert!((ridge_df(&orth, lambda).unwrap() - 2.0 / (1.0 + lambda)).abs() < 1e-12);
        }
    }
}
