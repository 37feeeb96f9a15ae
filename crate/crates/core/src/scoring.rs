//! Predictor scores from the Lasso, the Elastic Net and a reduced-penalty path.
//!
//! Predictors picked by the Lasso (`S_L`) score in `[1/2, 1]`, those picked
//! only by the Elastic Net (`S_+`) score in `[0, 1/2]`, all others score 0.
//! Where a predictor lands inside its band is read off a path of Lasso fits
//! in which the penalty on `S_+` is scaled by `δ ∈ Δ`.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::Scalar;
use crate::solver::{
    cv_select_lambda, lambda_grid, reduced_penalty_lasso_cached, solve_penalized, CvResult,
    GramCache, PenaltySpec, SolverOptions, SparseFit, DEFAULT_ENET_ALPHA, DEFAULT_GRID_LEN,
    DEFAULT_GRID_RATIO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Lasso,
    Plus,
    Out,
}

impl Membership {
    pub fn label(self) -> &'static str {
        match self {
            Membership::Lasso => "L",
            Membership::Plus => "+",
            Membership::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPartition {
    pub s_l: Model,
    pub s_plus: Model,
    pub s_out: Model,
}

impl SupportPartition {
    pub fn p(&self) -> usize {
        self.s_l.size() + self.s_plus.size() + self.s_out.size()
    }

    pub fn membership(&self, j: usize) -> Membership {
        if self.s_l.contains(j) {
            Membership::Lasso
        } else if self.s_plus.contains(j) {
            Membership::Plus
        } else {
            Membership::Out
        }
    }
}

/// Splits `{0..p}` into the Lasso support, Elastic-Net-only predictors and the rest.
pub fn partition_supports(lasso: &Model, enet: &Model, p: usize) -> Result<SupportPartition> {
    for m in [lasso, enet] {
        if m.indices().last().is_some_and(|&j| j >= p) {
            return Err(Error::InvalidInput(format!(
                "support {m} out of range for p = {p}"
            )));
        }
    }
    let s_plus = enet
        .indices()
        .iter()
        .copied()
        .filter(|&j| !lasso.contains(j))
        .collect();
    let s_out = (0..p)
        .filter(|&j| !lasso.contains(j) && !enet.contains(j))
        .collect();
    Ok(SupportPartition {
        s_l: lasso.clone(),
        s_plus: Model::new(s_plus)?,
        s_out: Model::new(s_out)?,
    })
}

/// Same as [`partition_supports`] taking solver output.
pub fn partition_fits<F: Scalar>(
    lasso: &SparseFit<F>,
    enet: &SparseFit<F>,
) -> Result<SupportPartition> {
    let p = lasso.coefficients.len();
    if enet.coefficients.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: enet.coefficients.len(),
        });
    }
    partition_supports(&lasso.support, &enet.support, p)
}

/// `(0, 1/steps, 2/steps, …, 1)`.
pub fn uniform_delta_grid<F: Scalar>(steps: usize) -> Vec<F> {
    (0..=steps)
        .map(|i| F::lit(i as f64 / steps as f64))
        .collect()
}

/// Grid with step 0.02.
pub fn default_delta_grid<F: Scalar>() -> Vec<F> {
    uniform_delta_grid(50)
}

fn check_delta_grid<F: Scalar>(grid: &[F]) -> Result<()> {
    let ok = grid.len() >= 2
        && grid[0] == F::zero()
        && grid[grid.len() - 1] == F::one()
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(
            "delta grid must increase strictly from 0 to 1".into(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint<F> {
    pub delta: F,
    pub support: Model,
}

/// Supports of the reduced-penalty Lasso at every grid value.
///
/// Solved from `δ = 1` downwards, each fit warm-started from the previous
/// one; `δ = 0` leaves `S_+` unpenalized. The result is in grid order.
pub fn reduced_penalty_path<F: Scalar>(
    data: &Dataset<F>,
    lambda: F,
    part: &SupportPartition,
    delta_grid: &[F],
    opts: &SolverOptions<F>,
) -> Result<Vec<PathPoint<F>>> {
    check_delta_grid(delta_grid)?;
    if part.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: part.p(),
        });
    }
    let mut out = Vec::with_capacity(delta_grid.len());
    let mut cache = GramCache::new(data);
    let mut warm: Option<Vec<F>> = None;
    for &delta in delta_grid.iter().rev() {
        let fit = reduced_penalty_lasso_cached(
            &mut cache,
            lambda,
            &part.s_plus,
            delta,
            warm.as_deref(),
            opts,
        )?;
        out.push(PathPoint {
            delta,
            support: fit.support,
        });
        warm = Some(fit.coefficients);
    }
    out.reverse();
    Ok(out)
}

/// Predictor scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaScores<F> {
    pub gamma: Vec<F>,
    /// `A_γ`: indices with positive score.
    pub support: Model,
    /// Smallest positive score.
    pub gamma_min: F,
    pub delta_grid: Vec<F>,
    /// Grid index `i*` per predictor; empty for externally supplied scores.
    pub i_star: Vec<usize>,
    pub partition: Option<SupportPartition>,
}

impl<F: Scalar> GammaScores<F> {
    /// Wraps an externally computed score vector.
    pub fn from_values(gamma: Vec<F>) -> Result<Self> {
        if let Some(j) = gamma
            .iter()
            .position(|&g| !(g >= F::zero() && g <= F::one()))
        {
            return Err(Error::InvalidInput(format!(
                "gamma[{j}] = {} outside [0, 1]",
                gamma[j]
            )));
        }
        Ok(Self::assemble(gamma, Vec::new(), Vec::new(), None))
    }

    fn assemble(
        gamma: Vec<F>,
        delta_grid: Vec<F>,
        i_star: Vec<usize>,
        partition: Option<SupportPartition>,
    ) -> Self {
        let support = Model::new((0..gamma.len()).filter(|&j| gamma[j] > F::zero()).collect())
            .expect("indices are distinct");
        let gamma_min = support
            .indices()
            .iter()
            .map(|&j| gamma[j])
            .fold(F::infinity(), F::min);
        GammaScores {
            gamma,
            support,
            gamma_min,
            delta_grid,
            i_star,
            partition,
        }
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    #[inline]
    pub fn get(&self, j: usize) -> F {
        self.gamma[j]
    }

    /// `δ_{i*_j}` when the score came from a path.
    pub fn delta_star(&self, j: usize) -> Option<F> {
        self.i_star.get(j).map(|&i| self.delta_grid[i])
    }
}

/// Turns a reduced-penalty path into scores.
///
/// For `j ∈ S_+`: `i*_j` is the largest grid index whose support contains
/// `j`, and `γ_j = δ_{i*}/2`. For `j ∈ S_L`: `i*_j` is the largest grid index
/// whose support omits `j`, and `γ_j = 1 − δ_{i*}/2`. An empty maximum gives
/// `i* = 0`. Everything else scores 0.
pub fn compute_gamma<F: Scalar>(
    path: &[PathPoint<F>],
    part: &SupportPartition,
    delta_grid: &[F],
) -> Result<GammaScores<F>> {
    check_delta_grid(delta_grid)?;
    if path.len() != delta_grid.len() {
        return Err(Error::DimensionMismatch {
            expected: delta_grid.len(),
            found: path.len(),
        });
    }
    let p = part.p();
    let half = F::lit(0.5);
    let mut gamma = vec![F::zero(); p];
    let mut i_star = vec![0usize; p];
    for j in 0..p {
        let (idx, g) = match part.membership(j) {
            Membership::Plus => {
                let i = path
                    .iter()
                    .rposition(|pt| pt.support.contains(j))
                    .unwrap_or(0);
                (i, delta_grid[i] * half)
            }
            Membership::Lasso => {
                let i = path
                    .iter()
                    .rposition(|pt| !pt.support.contains(j))
                    .unwrap_or(0);
                (i, F::one() - delta_grid[i] * half)
            }
            Membership::Out => (0, F::zero()),
        };
        i_star[j] = idx;
        gamma[j] = g;
    }
    Ok(GammaScores::assemble(
        gamma,
        delta_grid.to_vec(),
        i_star,
        Some(part.clone()),
    ))
}

#[derive(Debug, Clone)]
pub struct ScoringOptions<F> {
    pub folds: usize,
    pub enet_alpha: F,
    pub delta_grid: Vec<F>,
    pub grid_len: usize,
    pub grid_ratio: f64,
    pub solver: SolverOptions<F>,
    pub seed: u64,
}

impl<F: Scalar> Default for ScoringOptions<F> {
    fn default() -> Self {
        ScoringOptions {
            folds: 10,
            enet_alpha: F::lit(DEFAULT_ENET_ALPHA),
            delta_grid: default_delta_grid(),
            grid_len: DEFAULT_GRID_LEN,
            grid_ratio: DEFAULT_GRID_RATIO,
            solver: SolverOptions::default(),
            seed: 0,
        }
    }
}

/// Everything produced on the way to the scores.
#[derive(Debug, Clone)]
pub struct ScoreReport<F> {
    pub gamma: GammaScores<F>,
    pub lasso_cv: CvResult<F>,
    pub enet_cv: CvResult<F>,
    pub lasso: SparseFit<F>,
    pub enet: SparseFit<F>,
    pub path: Vec<PathPoint<F>>,
}

/// Cross-validated Lasso and Elastic Net, then the reduced-penalty path at
/// the Lasso's `λ`.
pub fn score_predictors<F: Scalar>(
    data: &Dataset<F>,
    opts: &ScoringOptions<F>,
) -> Result<ScoreReport<F>> {
    let one = F::one();
    let lasso_grid = lambda_grid(data, one, opts.grid_len, opts.grid_ratio);
    let lasso_cv = cv_select_lambda(data, one, opts.folds, &lasso_grid, opts.seed, &opts.solver)?;
    let lasso = solve_penalized(
        data,
        &PenaltySpec::lasso(lasso_cv.lambda),
        None,
        &opts.solver,
    )?;

    let enet_grid = lambda_grid(data, opts.enet_alpha, opts.grid_len, opts.grid_ratio);
    let enet_cv = cv_select_lambda(
        data,
        opts.enet_alpha,
        opts.folds,
        &enet_grid,
        opts.seed,
        &opts.solver,
    )?;
    let enet = solve_penalized(
        data,
        &PenaltySpec::elastic_net(enet_cv.lambda, opts.enet_alpha),
        None,
        &opts.solver,
    )?;

    let part = partition_fits(&lasso, &enet)?;
    if part.s_l.is_empty() && part.s_plus.is_empty() {
        return Err(Error::EmptySupports);
    }
    let path = reduced_penalty_path(data, lasso_cv.lambda, &part, &opts.delta_grid, &opts.solver)?;
    let gamma = compute_gamma(&path, &part, &opts.delta_grid)?;
    Ok(ScoreReport {
        gamma,
        lasso_cv,
        enet_cv,
        lasso,
        enet,
        path,
    })
}
