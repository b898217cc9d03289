//! Hyperparameter selection: k-fold grid search, GP marginal likelihood and
//! AIC for the torus model.
//!
//! Folds are contiguous and unshuffled; the first `n % k` folds get one extra
//! row. Ties go to the earlier grid point.

use alloc::vec::Vec;
use core::ops::Range;

use crate::calendar::{CivilDate, HolidayCalendar};
use crate::features::{Dataset, FeatureMatrix, TemperatureSource};
use crate::linalg::Matrix;
use crate::models::gp::{self, GpParams, MaternNu};
use crate::models::knn::{self, KnnModel, Weighting};
use crate::models::mlp::MlpConfig;
use crate::models::torus;
use crate::models::{FittedModel, Hyperparams, ModelError};

/// Tuning failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuningError {
    /// A grid has no points.
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    /// Fold count outside `2..=n`.
    #[error("{folds} folds requested for {rows} rows")]
    InvalidFolds {
        /// Requested folds.
        folds: usize,
        /// Available rows.
        rows: usize,
    },
    /// A fold would hold fewer than two rows.
    #[error("fold {fold} has only {rows} row(s)")]
    DegenerateFold {
        /// Fold index.
        fold: usize,
        /// Its size.
        rows: usize,
    },
    /// Every grid point failed to fit.
    #[error("every grid point failed; last error: {0}")]
    AllFailed(ModelError),
}

/// Candidate hyperparameters and the fold count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Grid points in priority order.
    pub points: Vec<Hyperparams>,
    /// Number of contiguous folds.
    pub folds: usize,
}

impl GridSpec {
    /// Ridge over a list of λ.
    pub fn ridge(lambdas: &[f64], folds: usize) -> Self {
        Self { points: lambdas.iter().map(|&lambda| Hyperparams::Ridge { lambda }).collect(), folds }
    }

    /// KNN over weightings × K (weighting outer).
    pub fn knn(ks: &[usize], weightings: &[Weighting], folds: usize) -> Self {
        let points = weightings
            .iter()
            .flat_map(|&weighting| ks.iter().map(move |&k| Hyperparams::Knn { k, weighting }))
            .collect();
        Self { points, folds }
    }

    /// MLP over learning rates × batch sizes, other settings from `base`.
    pub fn mlp(learning_rates: &[f64], batch_sizes: &[usize], base: &MlpConfig, folds: usize) -> Self {
        let points = learning_rates
            .iter()
            .flat_map(|&learning_rate| {
                batch_sizes
                    .iter()
                    .map(move |&batch_size| Hyperparams::Mlp(MlpConfig { learning_rate, batch_size, ..base.clone() }))
            })
            .collect();
        Self { points, folds }
    }
}

/// `n` values spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            libm::pow(10.0, a + (b - a) * t)
        })
        .collect()
}

/// Contiguous fold boundaries, sizes differing by at most one.
pub fn fold_ranges(n: usize, folds: usize) -> Result<Vec<Range<usize>>, TuningError> {
    if folds < 2 || folds > n {
        return Err(TuningError::InvalidFolds { folds, rows: n });
    }
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        if len < 2 {
            return Err(TuningError::DegenerateFold { fold: f, rows: len });
        }
        out.push(start..start + len);
        start += len;
    }
    Ok(out)
}

/// Up to `max` row indices spread evenly over `0..n`.
pub fn strided_subsample(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        return (0..n).collect();
    }
    (0..max).map(|i| i * n / max).collect()
}

/// Cross-validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Selected point.
    pub best: Hyperparams,
    /// Its mean validation MSE.
    pub best_score: f64,
    /// Every grid point with its mean validation MSE (`None` if it failed).
    pub table: Vec<(Hyperparams, Option<f64>)>,
}

fn split(fm: &FeatureMatrix, valid: &Range<usize>) -> (FeatureMatrix, FeatureMatrix) {
    let train: Vec<usize> = (0..fm.n_rows()).filter(|i| !valid.contains(i)).collect();
    let val: Vec<usize> = valid.clone().collect();
    (fm.select_rows(&train), fm.select_rows(&val))
}

fn mse(model: &FittedModel, val: &FeatureMatrix) -> Result<f64, ModelError> {
    let mut s = 0.0;
    for (row, y) in val.x.iter_rows().zip(&val.y) {
        let e = model.predict_row(row)? - y;
        s += e * e;
    }
    Ok(s / val.n_rows() as f64)
}

fn pick(table: Vec<(Hyperparams, Option<f64>)>, last_error: Option<ModelError>) -> Result<CvResult, TuningError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (_, s)) in table.iter().enumerate() {
        if let Some(s) = s {
            if s.is_finite() && best.is_none_or(|(_, b)| *s < b) {
                best = Some((i, *s));
            }
        }
    }
    match best {
        Some((i, score)) => Ok(CvResult { best: table[i].0.clone(), best_score: score, table }),
        None => Err(TuningError::AllFailed(last_error.unwrap_or(ModelError::EmptyTrainingSet))),
    }
}

/// Mean validation MSE over contiguous folds for each grid point; returns the
/// minimizer.
pub fn kfold_grid_search(fm: &FeatureMatrix, grid: &GridSpec) -> Result<CvResult, TuningError> {
    if grid.points.is_empty() {
        return Err(TuningError::EmptyGrid);
    }
    let folds = fold_ranges(fm.n_rows(), grid.folds)?;
    if grid.points.iter().all(|p| matches!(p, Hyperparams::Knn { .. })) {
        return knn_grid_search(fm, &grid.points, &folds);
    }
    let parts: Vec<(FeatureMatrix, FeatureMatrix)> = folds.iter().map(|r| split(fm, r)).collect();
    let mut last_error = None;
    let mut table = Vec::with_capacity(grid.points.len());
    for point in &grid.points {
        let mut total = 0.0;
        let mut ok = true;
        for (train, val) in &parts {
            match FittedModel::fit_features(point, train).and_then(|m| mse(&m, val)) {
                Ok(s) => total += s,
                Err(e) => {
                    last_error = Some(e);
                    ok = false;
                    break;
                }
            }
        }
        table.push((point.clone(), ok.then(|| total / parts.len() as f64)));
    }
    pick(table, last_error)
}

/// KNN search sharing one neighbour list per validation row across all
/// (K, weighting) points.
fn knn_grid_search(fm: &FeatureMatrix, points: &[Hyperparams], folds: &[Range<usize>]) -> Result<CvResult, TuningError> {
    let k_max = points
        .iter()
        .map(|p| match p {
            Hyperparams::Knn { k, .. } => *k,
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    let mut sums = alloc::vec![0.0; points.len()];
    let mut failed = alloc::vec![false; points.len()];
    let mut last_error = None;
    for valid in folds {
        let (train, val) = split(fm, valid);
        let n_train = train.n_rows();
        let model = match KnnModel::fit(&train.x, &train.y, 1, Weighting::Uniform) {
            Ok(m) => m,
            Err(e) => return Err(TuningError::AllFailed(e)),
        };
        let neighbours: Vec<Vec<knn::Neighbor>> = val.x.iter_rows().map(|r| model.neighbors(r, k_max)).collect();
        for (i, p) in points.iter().enumerate() {
            let Hyperparams::Knn { k, weighting } = *p else { continue };
            if k == 0 || k > n_train {
                failed[i] = true;
                last_error = Some(ModelError::InvalidK { k, n: n_train });
                continue;
            }
            let mut s = 0.0;
            for (nb, y) in neighbours.iter().zip(&val.y) {
                let e = knn::aggregate(&train.y, &nb[..k], weighting) - y;
                s += e * e;
            }
            sums[i] += s / val.n_rows() as f64;
        }
    }
    let table = points
        .iter()
        .zip(sums.iter().zip(&failed))
        .map(|(p, (s, f))| (p.clone(), (!f).then(|| s / folds.len() as f64)))
        .collect();
    pick(table, last_error)
}

/// Outcome of the GP likelihood search.
#[derive(Debug, Clone, PartialEq)]
pub struct GpTuning {
    /// Maximizer.
    pub params: GpParams,
    /// Its log marginal likelihood.
    pub log_likelihood: f64,
    /// Every grid point with its log marginal likelihood (`None` if infeasible).
    pub table: Vec<(GpParams, Option<f64>)>,
}

/// Maximize the log marginal likelihood of standardized targets over
/// ν × l × σ² (ν outermost).
pub fn gp_tune(x: &Matrix, y: &[f64], nu_grid: &[f64], l_grid: &[f64], sigma2_grid: &[f64]) -> Result<GpTuning, TuningError> {
    if nu_grid.is_empty() || l_grid.is_empty() || sigma2_grid.is_empty() {
        return Err(TuningError::EmptyGrid);
    }
    let mean = crate::math::mean(y);
    let sd = crate::math::sqrt(crate::math::variance(y));
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let z: Vec<f64> = y.iter().map(|v| (v - mean) / sd).collect();
    let mut table = Vec::new();
    let mut best: Option<(GpParams, f64)> = None;
    let mut last_error = None;
    for &nu in nu_grid {
        for &l in l_grid {
            for &s2 in sigma2_grid {
                let outcome = GpParams::new(nu, l, s2).and_then(|p| Ok((p, gp::log_marginal_likelihood(x, &z, &p)?)));
                match outcome {
                    Ok((p, ll)) if ll.is_finite() => {
                        if best.is_none_or(|(_, b)| ll > b) {
                            best = Some((p, ll));
                        }
                        table.push((p, Some(ll)));
                    }
                    Ok((p, _)) => table.push((p, None)),
                    Err(e) => {
                        let nu = MaternNu::try_from(nu).unwrap_or(MaternNu::Half);
                        table.push((GpParams { nu, length_scale: l, noise_variance: s2 }, None));
                        last_error = Some(e);
                    }
                }
            }
        }
    }
    match best {
        Some((params, log_likelihood)) => Ok(GpTuning { params, log_likelihood, table }),
        None => Err(TuningError::AllFailed(last_error.unwrap_or(ModelError::NotPositiveDefinite))),
    }
}

/// Outcome of the torus AIC search.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusTuning {
    /// Selected yearly harmonics.
    pub n_yearly: usize,
    /// Selected weekly harmonics.
    pub n_weekly: usize,
    /// Its AIC.
    pub aic: f64,
    /// `(N_d, N_w, AIC)` per grid point (`None` if the fit failed).
    pub table: Vec<(usize, usize, Option<f64>)>,
}

/// Minimize AIC over `N_d × N_w` (N_d outermost).
#[allow(clippy::too_many_arguments)]
pub fn torus_tune(
    dataset: &Dataset,
    from: CivilDate,
    to: CivilDate,
    n_yearly_grid: &[usize],
    n_weekly_grid: &[usize],
    source: TemperatureSource,
    calendar: &HolidayCalendar,
) -> Result<TorusTuning, TuningError> {
    if n_yearly_grid.is_empty() || n_weekly_grid.is_empty() {
        return Err(TuningError::EmptyGrid);
    }
    let mut table = Vec::new();
    let mut best: Option<(usize, usize, f64)> = None;
    let mut last_error = None;
    for &nd in n_yearly_grid {
        for &nw in n_weekly_grid {
            match torus::torus_fit(dataset, from, to, nd, nw, source, calendar) {
                Ok(m) => {
                    let aic = m.aic();
                    if best.is_none_or(|(_, _, b)| aic < b) {
                        best = Some((nd, nw, aic));
                    }
                    table.push((nd, nw, Some(aic)));
                }
                Err(e) => {
                    table.push((nd, nw, None));
                    last_error = Some(e);
                }
            }
        }
    }
    match best {
        Some((n_yearly, n_weekly, aic)) => Ok(TorusTuning { n_yearly, n_weekly, aic, table }),
        None => Err(TuningError::AllFailed(last_error.unwrap_or(ModelError::EmptyTrainingSet))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_rows() {
        let f = fold_ranges(13, 5).unwrap();
        let sizes: Vec<usize> = f.iter().map(|r| r.len()).collect();
        assert_eq!(sizes, [3, 3, 3, 2, 2]);
        assert_eq!(f.last().unwrap().end, 13);
        assert_eq!(fold_ranges(9, 5), Err(TuningError::DegenerateFold { fold: 4, rows: 1 }));
        assert_eq!(fold_ranges(3, 5), Err(TuningError::InvalidFolds { folds: 5, rows: 3 }));
        assert_eq!(fold_ranges(10, 1), Err(TuningError::InvalidFolds { folds: 1, rows: 10 }));
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-4, 1e2, 7);
        assert_eq!(v.len(), 7);
        assert!((v[0] - 1e-4).abs() < 1e-18 && (v[6] - 1e2).abs() < 1e-10);
        assert!((v[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subsample_is_even() {
        assert_eq!(strided_subsample(5, 10), [0, 1, 2, 3, 4]);
        assert_eq!(strided_subsample(10, 4), [0, 2, 5, 7]);
    }
}
