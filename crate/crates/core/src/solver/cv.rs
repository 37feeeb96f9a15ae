//! K-fold cross-validation over a λ grid.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::cd::{lambda1_max, solve_penalized_cached, GramCache, SolverOptions};
use super::penalty::PenaltySpec;

/// Number of grid points in the default path.
pub const DEFAULT_GRID_LEN: usize = 100;
/// Smallest grid value relative to `λ_max`.
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CvPoint<F> {
    pub lambda: F,
    /// Pooled held-out MSE (total squared error over n).
    pub mean_mse: F,
    /// Standard error of the per-fold MSEs.
    pub std_err: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<F> {
    pub lambda: F,
    pub index: usize,
    pub curve: Vec<CvPoint<F>>,
}

/// Smallest `λ` whose `(λ, α)` Elastic Net solution is all zero.
pub fn lambda_max<F: Scalar>(data: &Dataset<F>, alpha: F) -> F {
    lambda1_max(data, None) / alpha
}

/// `len` log-spaced values from `λ_max` down to `ratio · λ_max`.
pub fn lambda_grid<F: Scalar>(data: &Dataset<F>, alpha: F, len: usize, ratio: f64) -> Vec<F> {
    let top = lambda_max(data, alpha).as_f64();
    log_grid(top, top * ratio, len)
        .into_iter()
        .map(F::lit)
        .collect()
}

pub fn default_lambda_grid<F: Scalar>(data: &Dataset<F>, alpha: F) -> Vec<F> {
    lambda_grid(data, alpha, DEFAULT_GRID_LEN, DEFAULT_GRID_RATIO)
}

fn log_grid(hi: f64, lo: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..len)
        .map(|i| (a + (b - a) * i as f64 / (len - 1) as f64).exp())
        .collect()
}

/// Fold label for every observation, balanced and shuffled by `seed`.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::rng::stream(seed, &[0xC5]));
    let mut label = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        label[i] = pos % folds;
    }
    label
}

/// Selects `λ` from a strictly decreasing grid by minimum held-out MSE.
///
/// Each training fold is re-centered on its own means before fitting; the
/// held-out rows are predicted with the matching intercept. Fits along the
/// grid are warm-started from the previous grid value.
pub fn cv_select_lambda<F: Scalar>(
    data: &Dataset<F>,
    alpha: F,
    folds: usize,
    grid: &[F],
    seed: u64,
    opts: &SolverOptions<F>,
) -> Result<CvResult<F>> {
    let n = data.n();
    if grid.is_empty() {
        return Err(Error::InvalidConfig("lambda grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig(
            "lambda grid must be strictly decreasing".into(),
        ));
    }
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if !(alpha > F::zero() && alpha <= F::one()) {
        return Err(Error::InvalidConfig(format!(
            "alpha {alpha} outside (0, 1]"
        )));
    }
    let labels = fold_assignment(n, folds, seed);
    let members: Vec<Vec<usize>> = (0..folds)
        .map(|f| (0..n).filter(|&i| labels[i] == f).collect())
        .collect();
    for (f, m) in members.iter().enumerate() {
        if m.len() < 2 || n - m.len() < 2 {
            return Err(Error::FoldTooSmall {
                fold: f,
                size: m.len().min(n - m.len()),
            });
        }
    }

    // squared error per (fold, grid index)
    let per_fold: Vec<Vec<F>> = members
        .par_iter()
        .map(|test| fold_errors(data, alpha, grid, test, opts))
        .collect::<Result<_>>()?;

    let nf = F::lit(n as f64);
    let kf = F::lit(folds as f64);
    let curve: Vec<CvPoint<F>> = grid
        .iter()
        .enumerate()
        .map(|(g, &lambda)| {
            let total = per_fold.iter().fold(F::zero(), |a, e| a + e[g]);
            let fold_mse: Vec<F> = per_fold
                .iter()
                .zip(&members)
                .map(|(e, m)| e[g] / F::lit(m.len() as f64))
                .collect();
            let mean = fold_mse.iter().fold(F::zero(), |a, &b| a + b) / kf;
            let var = fold_mse
                .iter()
                .fold(F::zero(), |a, &b| a + (b - mean) * (b - mean))
                / (kf - F::one());
            CvPoint {
                lambda,
                mean_mse: total / nf,
                std_err: (var / kf).sqrt(),
            }
        })
        .collect();

    let index = curve.iter().enumerate().fold(0, |best, (i, c)| {
        if c.mean_mse < curve[best].mean_mse {
            i
        } else {
            best
        }
    });
    Ok(CvResult {
        lambda: grid[index],
        index,
        curve,
    })
}

fn fold_errors<F: Scalar>(
    data: &Dataset<F>,
    alpha: F,
    grid: &[F],
    test: &[usize],
    opts: &SolverOptions<F>,
) -> Result<Vec<F>> {
    let n = data.n();
    let mut is_test = vec![false; n];
    for &i in test {
        is_test[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let (train_data, means, y_mean) = data.recentered_rows(&train);
    let p = data.p();
    let mut cache = GramCache::new(&train_data);
    let mut beta: Option<Vec<F>> = None;
    let mut out = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let fit = solve_penalized_cached(
            &mut cache,
            &PenaltySpec::elastic_net(lambda, alpha),
            beta.as_deref(),
            opts,
        )?;
        let mut sse = F::zero();
        for &i in test {
            let mut pred = y_mean;
            for j in fit.support.indices() {
                pred = pred + fit.coefficients[*j] * (data.x()[[i, *j]] - means[*j]);
            }
            let e = data.y()[i] - pred;
            sse = sse + e * e;
        }
        debug_assert_eq!(fit.coefficients.len(), p);
        beta = Some(fit.coefficients);
        out.push(sse);
    }
    Ok(out)
}
