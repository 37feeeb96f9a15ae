//! Cyclic coordinate descent for the weighted Elastic Net.
//!
//! Objective: `(1/n)‖y − Xβ‖² + λ₁ Σ w_j |β_j| + λ₂ ‖β‖²`.
//!
//! With `c_j = ‖x_j‖²/n` and `z_j = x_jᵀ r_{(j)}/n` (partial residual
//! excluding `j`), the coordinate minimizer is
//! `β_j = soft(z_j, λ₁ w_j / 2) / (c_j + λ₂)`.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, sq_norm, sub_scaled};
use crate::model::Model;
use crate::scalar::Scalar;

use super::penalty::PenaltySpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<F> {
    /// Convergence threshold on the largest coefficient change in a full sweep.
    pub tol: F,
    /// Maximum number of sweeps (full and active-set sweeps both count).
    pub max_iter: usize,
    pub active_set: bool,
    /// Keep the objective value after every sweep.
    pub trace: bool,
}

impl<F: Scalar> Default for SolverOptions<F> {
    fn default() -> Self {
        SolverOptions {
            tol: F::lit(1e-7),
            max_iter: 10_000,
            active_set: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseFit<F> {
    pub coefficients: Vec<F>,
    pub support: Model,
    pub objective: F,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each sweep, when requested.
    pub trace: Vec<F>,
}

#[inline]
pub fn soft_threshold<F: Scalar>(z: F, t: F) -> F {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        F::zero()
    }
}

/// Value of the penalized objective at `beta`.
pub fn objective<F: Scalar>(data: &Dataset<F>, penalty: &PenaltySpec<F>, beta: &[F]) -> F {
    let fitted = data.predict_full(beta);
    let rss = data
        .y()
        .iter()
        .zip(fitted.iter())
        .fold(F::zero(), |a, (&y, &f)| a + (y - f) * (y - f));
    penalty_value(penalty, beta) + rss / F::lit(data.n() as f64)
}

fn penalty_value<F: Scalar>(penalty: &PenaltySpec<F>, beta: &[F]) -> F {
    let l1 = beta
        .iter()
        .enumerate()
        .fold(F::zero(), |a, (j, &b)| a + penalty.weight(j) * b.abs());
    penalty.lambda1 * l1 + penalty.lambda2 * sq_norm(beta)
}

/// Largest violation of the stationarity conditions at `beta`.
///
/// With `g_j = (2/n) x_jᵀ(y − Xβ)`: for `β_j ≠ 0` the residual is
/// `|g_j − 2λ₂β_j − λ₁ w_j sign(β_j)|`, for `β_j = 0` it is
/// `max(0, |g_j| − λ₁ w_j)`.
pub fn kkt_violation<F: Scalar>(data: &Dataset<F>, penalty: &PenaltySpec<F>, beta: &[F]) -> F {
    let n = F::lit(data.n() as f64);
    let two = F::lit(2.0);
    let fitted = data.predict_full(beta);
    let resid: Vec<F> = data
        .y()
        .iter()
        .zip(fitted.iter())
        .map(|(&y, &f)| y - f)
        .collect();
    (0..data.p()).fold(F::zero(), |worst, j| {
        let g = two * dot(data.col(j), &resid) / n;
        let t = penalty.lambda1 * penalty.weight(j);
        let b = beta[j];
        let v = if b != F::zero() {
            (g - two * penalty.lambda2 * b - t * b.signum()).abs()
        } else {
            (g.abs() - t).max(F::zero())
        };
        worst.max(v)
    })
}

/// Smallest `λ₁` for which the zero vector is optimal (`λ₂` irrelevant).
pub fn lambda1_max<F: Scalar>(data: &Dataset<F>, weights: Option<&[F]>) -> F {
    let n = F::lit(data.n() as f64);
    let two = F::lit(2.0);
    (0..data.p()).fold(F::zero(), |m, j| {
        let w = weights.map_or(F::one(), |w| w[j]);
        if w == F::zero() {
            return m;
        }
        m.max(two * dot(data.col(j), data.y_slice()).abs() / (n * w))
    })
}

/// Inner products `x_jᵀx_k / n` and `x_jᵀy / n`, filled one column at a
/// time as coordinates become nonzero. Reusable across solves on the same
/// data, e.g. along a regularization path.
#[derive(Debug, Clone)]
pub struct GramCache<'a, F> {
    data: &'a Dataset<F>,
    nf: F,
    xty: Vec<F>,
    yty: F,
    col_sq: Vec<F>,
    cols: Vec<Option<Vec<F>>>,
}

impl<'a, F: Scalar> GramCache<'a, F> {
    pub fn new(data: &'a Dataset<F>) -> Self {
        let p = data.p();
        let nf = F::lit(data.n() as f64);
        let y = data.y_slice();
        GramCache {
            data,
            nf,
            xty: (0..p).map(|j| dot(data.col(j), y) / nf).collect(),
            yty: sq_norm(y) / nf,
            col_sq: (0..p).map(|j| sq_norm(data.col(j)) / nf).collect(),
            cols: vec![None; p],
        }
    }

    pub fn data(&self) -> &'a Dataset<F> {
        self.data
    }

    /// Number of Gram columns computed so far.
    pub fn cached_columns(&self) -> usize {
        self.cols.iter().filter(|c| c.is_some()).count()
    }

    fn column(&mut self, j: usize) -> &[F] {
        let (data, nf) = (self.data, self.nf);
        self.cols[j].get_or_insert_with(|| {
            let xj = data.col(j);
            (0..data.p()).map(|k| dot(xj, data.col(k)) / nf).collect()
        })
    }
}

/// Coordinate-descent solve of the weighted Elastic Net.
///
/// Full cyclic sweeps alternate with sweeps over the nonzero coordinates.
/// When the active sweeps stall, the quadratic restricted to the current
/// sign pattern is minimized directly and the iterate moves towards that
/// minimizer, stopping at the first sign change; such a step is kept only if
/// it lowers the objective. Convergence is only declared after a full sweep
/// moves no coefficient by `tol` or more.
///
/// Non-convergence within `max_iter` sweeps is reported through
/// `converged = false`, not as an error.
pub fn solve_penalized<F: Scalar>(
    data: &Dataset<F>,
    penalty: &PenaltySpec<F>,
    init: Option<&[F]>,
    opts: &SolverOptions<F>,
) -> Result<SparseFit<F>> {
    solve_penalized_cached(&mut GramCache::new(data), penalty, init, opts)
}

/// [`solve_penalized`] sharing inner products through `cache`.
pub fn solve_penalized_cached<F: Scalar>(
    cache: &mut GramCache<'_, F>,
    penalty: &PenaltySpec<F>,
    init: Option<&[F]>,
    opts: &SolverOptions<F>,
) -> Result<SparseFit<F>> {
    let data = cache.data;
    let p = data.p();
    penalty.validate(p)?;
    if let Some(b) = init {
        if b.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: b.len(),
            });
        }
    }
    if !(opts.tol > F::zero()) {
        return Err(Error::InvalidConfig("tol must be positive".into()));
    }
    let mut state = Descent::new(cache, penalty, init);
    let mut sweeps = 0usize;
    let mut converged = false;
    let mut trace = Vec::new();
    let all: Vec<usize> = (0..p).collect();

    'outer: while sweeps < opts.max_iter {
        state.refresh_gradient();
        let change = state.sweep(&all, false);
        sweeps += 1;
        if opts.trace {
            trace.push(state.objective());
        }
        if change < opts.tol {
            converged = true;
            break;
        }
        if !opts.active_set {
            continue;
        }
        let mut stalled = 0usize;
        loop {
            if sweeps >= opts.max_iter {
                break 'outer;
            }
            let active: Vec<usize> = (0..p).filter(|&j| state.beta[j] != F::zero()).collect();
            let change = state.sweep(&active, true);
            sweeps += 1;
            if opts.trace {
                trace.push(state.objective());
            }
            if change < opts.tol {
                break;
            }
            stalled += 1;
            if stalled % FACE_STEP_EVERY == 0 {
                state.face_step(&active);
            }
        }
    }

    let beta = state.beta;
    let support = Model::new((0..p).filter(|&j| beta[j] != F::zero()).collect())?;
    Ok(SparseFit {
        objective: objective(data, penalty, &beta),
        coefficients: beta,
        support,
        iterations: sweeps,
        converged,
        trace,
    })
}

/// Stalled active sweeps between direct solves on the sign face.
const FACE_STEP_EVERY: usize = 10;

/// Descent state in covariance form: `grad_j = x_jᵀ(y − Xβ)/n`.
struct Descent<'c, 'a, F> {
    cache: &'c mut GramCache<'a, F>,
    penalty: &'c PenaltySpec<F>,
    thresholds: Vec<F>,
    beta: Vec<F>,
    grad: Vec<F>,
}

impl<'c, 'a, F: Scalar> Descent<'c, 'a, F> {
    fn new(
        cache: &'c mut GramCache<'a, F>,
        penalty: &'c PenaltySpec<F>,
        init: Option<&[F]>,
    ) -> Self {
        let p = cache.data.p();
        let half = F::lit(0.5);
        let thresholds = (0..p)
            .map(|j| half * penalty.lambda1 * penalty.weight(j))
            .collect();
        let beta = init.map_or_else(|| vec![F::zero(); p], <[F]>::to_vec);
        let mut d = Descent {
            cache,
            penalty,
            thresholds,
            beta,
            grad: Vec::new(),
        };
        d.refresh_gradient();
        d
    }

    fn refresh_gradient(&mut self) {
        let mut g = self.cache.xty.clone();
        for (j, &b) in self.beta.iter().enumerate() {
            if b != F::zero() {
                sub_scaled(&mut g, b, self.cache.column(j));
            }
        }
        self.grad = g;
    }

    fn objective(&self) -> F {
        let fit = self
            .beta
            .iter()
            .zip(self.cache.xty.iter().zip(&self.grad))
            .filter(|(b, _)| **b != F::zero())
            .fold(F::zero(), |a, (&b, (&c, &g))| a + b * (c + g));
        self.cache.yty - fit + penalty_value(self.penalty, &self.beta)
    }

    /// One cyclic pass over `set`; returns the largest coefficient change.
    ///
    /// With `restricted`, only the gradient entries in `set` are kept up to
    /// date; the rest must be refreshed before they are read again.
    fn sweep(&mut self, set: &[usize], restricted: bool) -> F {
        let mut max_change = F::zero();
        for &j in set {
            let c = self.cache.col_sq[j];
            let old = self.beta[j];
            let z = self.grad[j] + c * old;
            let denom = c + self.penalty.lambda2;
            let new = if denom > F::zero() {
                soft_threshold(z, self.thresholds[j]) / denom
            } else {
                F::zero()
            };
            let delta = new - old;
            if delta != F::zero() {
                let col = self.cache.column(j);
                if restricted {
                    for &k in set {
                        self.grad[k] = self.grad[k] - delta * col[k];
                    }
                } else {
                    sub_scaled(&mut self.grad, delta, col);
                }
                self.beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    /// Moves towards the minimizer of the objective restricted to the sign
    /// pattern of `active`, stopping at the first coordinate that would
    /// change sign. Reverted if it does not lower the objective.
    fn face_step(&mut self, active: &[usize]) {
        let k = active.len();
        if k == 0 {
            return;
        }
        let mut gram = vec![F::zero(); k * k];
        for (a, &j) in active.iter().enumerate() {
            let col = self.cache.column(j);
            for (b, &l) in active.iter().enumerate() {
                gram[a * k + b] = col[l];
            }
            gram[a * k + a] = gram[a * k + a] + self.penalty.lambda2;
        }
        let rhs: Vec<F> = active
            .iter()
            .map(|&j| self.cache.xty[j] - self.thresholds[j] * self.beta[j].signum())
            .collect();
        let target = match cholesky_solve(&gram, k, &rhs) {
            Some(t) => t,
            None => {
                // rank-deficient face: any minimizer will do, take a ridge-damped one
                let jitter = F::lit(1e-9) * (0..k).fold(F::zero(), |a, i| a.max(gram[i * k + i]));
                for i in 0..k {
                    gram[i * k + i] = gram[i * k + i] + jitter;
                }
                match cholesky_solve(&gram, k, &rhs) {
                    Some(t) => t,
                    None => return,
                }
            }
        };
        let mut step = F::one();
        let mut blocking = None;
        for (a, &j) in active.iter().enumerate() {
            let b = self.beta[j];
            if target[a].signum() != b.signum() || target[a] == F::zero() {
                let t = b / (b - target[a]);
                if t < step {
                    step = t;
                    blocking = Some(a);
                }
            }
        }
        let before = self.objective();
        let saved = self.beta.clone();
        for (a, &j) in active.iter().enumerate() {
            self.beta[j] = self.beta[j] + step * (target[a] - self.beta[j]);
        }
        if let Some(a) = blocking {
            self.beta[active[a]] = F::zero();
        }
        self.refresh_gradient();
        if !(self.objective() <= before) {
            self.beta = saved;
            self.refresh_gradient();
        }
    }
}

/// Lasso with the ℓ1 weight reduced to `delta` on `s_plus` and 1 elsewhere.
pub fn reduced_penalty_lasso<F: Scalar>(
    data: &Dataset<F>,
    lambda: F,
    s_plus: &Model,
    delta: F,
    init: Option<&[F]>,
    opts: &SolverOptions<F>,
) -> Result<SparseFit<F>> {
    reduced_penalty_lasso_cached(&mut GramCache::new(data), lambda, s_plus, delta, init, opts)
}

/// [`reduced_penalty_lasso`] sharing inner products through `cache`.
pub fn reduced_penalty_lasso_cached<F: Scalar>(
    cache: &mut GramCache<'_, F>,
    lambda: F,
    s_plus: &Model,
    delta: F,
    init: Option<&[F]>,
    opts: &SolverOptions<F>,
) -> Result<SparseFit<F>> {
    if !(delta >= F::zero() && delta <= F::one()) {
        return Err(Error::InvalidConfig(format!(
            "delta {delta} outside [0, 1]"
        )));
    }
    let weights: Vec<F> = (0..cache.data.p())
        .map(|j| if s_plus.contains(j) { delta } else { F::one() })
        .collect();
    solve_penalized_cached(
        cache,
        &PenaltySpec::weighted_lasso(lambda, weights),
        init,
        opts,
    )
}
