//! Small dense linear algebra: a row-major matrix, Cholesky factorization
//! for the symmetric positive definite systems of ridge and GP, and
//! Householder QR for the torus least-squares fits.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Errors raised by the factorizations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    /// The matrix is not (numerically) positive definite.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite {
        /// Index of the failing pivot.
        pivot: usize,
        /// Value of the pivot before the square root.
        value: f64,
    },
    /// The least-squares design is rank deficient.
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient {
        /// First column found linearly dependent on the earlier ones.
        column: usize,
    },
    /// Operand shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected length.
        expected: usize,
        /// Supplied length.
        got: usize,
    },
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Wrap a row-major buffer. Panics if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must equal rows * cols");
        Self { rows, cols, data }
    }

    /// Build from a slice of equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable row-major storage.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable row `i`.
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Iterator over rows.
    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// New matrix made of the selected rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        self.iter_rows().map(|r| dot(r, v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "vector length differs from row count");
        let mut out = vec![0.0; self.cols];
        for (r, &vi) in self.iter_rows().zip(v) {
            for (o, &x) in out.iter_mut().zip(r) {
                *o += x * vi;
            }
        }
        out
    }

    /// Gram matrix `selfᵀ self`.
    pub fn gram(&self) -> Self {
        let p = self.cols;
        let mut g = Self::zeros(p, p);
        for r in self.iter_rows() {
            for a in 0..p {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let grow = &mut g.data[a * p..a * p + p];
                for b in a..p {
                    grow[b] += ra * r[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                g.data[a * p + b] = g.data[b * p + a];
            }
        }
        g
    }

    /// Add `value` to every diagonal entry.
    pub fn add_diagonal(&mut self, value: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += value;
        }
    }

    /// Mean of the diagonal.
    pub fn mean_diagonal(&self) -> f64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum::<f64>() / n as f64
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean distance.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factor a symmetric positive definite matrix. Only the lower triangle
    /// of `a` is read.
    pub fn factor(mut a: Matrix) -> Result<Self, LinalgError> {
        let n = a.rows;
        if a.cols != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: a.cols });
        }
        // Row-oriented left-looking variant: row i of L only needs rows < i,
        // so every inner product runs over two contiguous prefixes.
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = a.data.split_at_mut(i * n);
                let row_i = &mut tail[..n];
                let s = if j == i {
                    dot(&row_i[..j], &row_i[..j])
                } else {
                    dot(&row_i[..j], &head[j * n..j * n + j])
                };
                if j == i {
                    let d = row_i[i] - s;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(LinalgError::NotPositiveDefinite { pivot: i, value: d });
                    }
                    row_i[i] = math::sqrt(d);
                } else {
                    let ljj = head[j * n + j];
                    row_i[j] = (row_i[j] - s) / ljj;
                }
            }
            for j in i + 1..n {
                a.data[i * n + j] = 0.0;
            }
        }
        Ok(Self { l: a })
    }

    /// Order of the factored matrix.
    pub fn order(&self) -> usize {
        self.l.rows
    }

    /// The lower-triangular factor.
    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solve `L z = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let row = self.l.row(i);
            let s = dot(&row[..i], &b[..i]);
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solve `Lᵀ x = z` in place.
    pub fn backward_substitute(&self, b: &mut [f64]) {
        let n = self.order();
        for i in (0..n).rev() {
            b[i] /= self.l[(i, i)];
            let bi = b[i];
            let row = self.l.row(i);
            for k in 0..i {
                b[k] -= row[k] * bi;
            }
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_substitute(&mut x);
        self.backward_substitute(&mut x);
        x
    }

    /// `ln det A`.
    pub fn log_determinant(&self) -> f64 {
        2.0 * (0..self.order()).map(|i| math::ln(self.l[(i, i)])).sum::<f64>()
    }

    /// Diagonal of `A⁻¹`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.order();
        let mut out = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[i] = 1.0;
            self.forward_substitute(&mut e);
            out.push(dot(&e, &e));
        }
        out
    }
}

/// Least-squares solution of `min ‖A x − b‖²` by Householder QR.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// Coefficients.
    pub coefficients: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
}

/// Solve an overdetermined system with Householder reflections.
///
/// A column whose remaining norm falls below `rank_tol` times its original
/// norm is reported as [`LinalgError::RankDeficient`].
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<LeastSquares, LinalgError> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch { expected: m, got: b.len() });
    }
    if m < n {
        return Err(LinalgError::RankDeficient { column: m });
    }
    // Column-major working copy so reflections stream over contiguous memory.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| math::sqrt(dot(c, c))).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];
    const RANK_TOL: f64 = 1e-11;

    for k in 0..n {
        let alpha_norm = math::sqrt(dot(&cols[k][k..], &cols[k][k..]));
        if norms[k] == 0.0 || alpha_norm <= RANK_TOL * norms[k] {
            return Err(LinalgError::RankDeficient { column: k });
        }
        let alpha = if cols[k][k] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        diag[k] = alpha;
        if vnorm2 > 0.0 {
            for col in cols.iter_mut().skip(k + 1) {
                let s = 2.0 * dot(&v, &col[k..]) / vnorm2;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            let s = 2.0 * dot(&v, &rhs[k..]) / vnorm2;
            for (r, vi) in rhs[k..].iter_mut().zip(&v) {
                *r -= s * vi;
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= cols[j][k] * x[j];
        }
        x[k] = s / diag[k];
    }
    let rss = dot(&rhs[n..], &rhs[n..]);
    Ok(LeastSquares { coefficients: x, rss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_small_spd_system() {
        let a = Matrix::from_rows(&[[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]]);
        let ch = Cholesky::factor(a.clone()).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let back = a.matvec(&x);
        for (got, want) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let rebuilt = ch.lower().matmul(&ch.lower().transpose());
        for (p, q) in rebuilt.as_slice().iter().zip(a.as_slice()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(Cholesky::factor(a), Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn log_determinant_of_diagonal() {
        let a = Matrix::from_rows(&[[2.0, 0.0], [0.0, 8.0]]);
        let ch = Cholesky::factor(a).unwrap();
        assert!((ch.log_determinant() - 16f64.ln()).abs() < 1e-14);
        let d = ch.inverse_diagonal();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn lstsq_fits_line_and_reports_rss() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]);
        let b = [1.0, 3.0, 5.0, 7.5];
        let fit = lstsq(&a, &b).unwrap();
        // normal equations by hand: [4 6; 6 14] x = [16.5, 35.5]
        let det = 4.0 * 14.0 - 36.0;
        let x0 = (14.0 * 16.5 - 6.0 * 35.5) / det;
        let x1 = (4.0 * 35.5 - 6.0 * 16.5) / det;
        assert!((fit.coefficients[0] - x0).abs() < 1e-12);
        assert!((fit.coefficients[1] - x1).abs() < 1e-12);
        let rss: f64 = (0..4)
            .map(|i| {
                let r = b[i] - x0 - x1 * i as f64;
                r * r
            })
            .sum();
        assert!((fit.rss - rss).abs() < 1e-12);
    }

    #[test]
    fn lstsq_detects_collinear_columns() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        assert!(matches!(lstsq(&a, &[1.0, 2.0, 3.0]), Err(LinalgError::RankDeficient { column: 1 })));
    }

    #[test]
    fn gram_matches_explicit_product() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.5, -1.0, 3.0]]);
        let g = x.gram();
        let e = x.transpose().matmul(&x);
        assert_eq!(g, e);
    }
}
