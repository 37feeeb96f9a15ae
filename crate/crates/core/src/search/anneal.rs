//! Simulated-annealing walk over fixed-size models.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lsq::refit_mse;
use crate::model::Model;
use crate::rng::{self, Rng};
use crate::scalar::Scalar;
use crate::scoring::GammaScores;

use super::pool::ModelPool;
use super::proposal::{accept, acceptance_ratio, propose};

/// Temperatures and the number of iterations spent at each.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<F> {
    pub temperatures: Vec<F>,
    pub iters: Vec<usize>,
}

impl<F: Scalar> Schedule<F> {
    /// `scale · ratio^k` for `k = 1..=count`, `iters` steps at every level.
    pub fn geometric(scale: F, ratio: F, count: usize, iters: usize) -> Self {
        let temperatures = (1..=count).map(|k| scale * ratio.powi(k as i32)).collect();
        Schedule {
            temperatures,
            iters: vec![iters; count],
        }
    }

    pub fn with_iters_scaled(mut self, factor: usize) -> Self {
        for n in &mut self.iters {
            *n *= factor;
        }
        self
    }

    pub fn total_iters(&self) -> usize {
        self.iters.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.len() != self.iters.len() {
            return Err(Error::InvalidConfig(format!(
                "{} temperatures but {} iteration counts",
                self.temperatures.len(),
                self.iters.len()
            )));
        }
        if self
            .temperatures
            .iter()
            .any(|&t| !(t > F::zero() && t.is_finite()))
        {
            return Err(Error::InvalidConfig("temperatures must be positive".into()));
        }
        if self.temperatures.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidConfig(
                "temperatures must strictly decrease".into(),
            ));
        }
        Ok(())
    }
}

impl<F: Scalar> Default for Schedule<F> {
    /// `10 · (0.7¹, …, 0.7²⁰)` with 100 steps per temperature.
    fn default() -> Self {
        Schedule::geometric(F::lit(10.0), F::lit(0.7), 20, 100)
    }
}

/// Settings shared by every chain of a multi-start search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions<F> {
    pub schedule: Schedule<F>,
    pub seed: u64,
    /// Record every proposed model, not just the visited ones.
    pub record_candidates: bool,
}

impl<F: Scalar> Default for SearchOptions<F> {
    fn default() -> Self {
        SearchOptions {
            schedule: Schedule::default(),
            seed: 0,
            record_candidates: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealingConfig<F> {
    pub kappa: usize,
    pub schedule: Schedule<F>,
    pub start: Model,
    pub seed: u64,
    pub record_candidates: bool,
}

impl<F: Scalar> AnnealingConfig<F> {
    pub fn new(start: Model, opts: &SearchOptions<F>) -> Self {
        AnnealingConfig {
            kappa: start.size(),
            schedule: opts.schedule.clone(),
            start,
            seed: opts.seed,
            record_candidates: opts.record_candidates,
        }
    }

    fn validate<G: Scalar>(&self, n: usize, gamma: &GammaScores<G>) -> Result<()> {
        self.schedule.validate()?;
        if self.start.size() != self.kappa {
            return Err(Error::InvalidConfig(format!(
                "start model has {} predictors, kappa is {}",
                self.start.size(),
                self.kappa
            )));
        }
        if self.kappa == 0 || self.kappa + 1 > n {
            return Err(Error::InvalidConfig(format!(
                "kappa {} must be in 1..={}",
                self.kappa,
                n.saturating_sub(1)
            )));
        }
        if !self.start.is_subset_of(&gamma.support) {
            return Err(Error::InvalidConfig(format!(
                "start model {} is not inside the positive-score set",
                self.start
            )));
        }
        if gamma.support.size() <= self.kappa {
            return Err(Error::InvalidConfig(format!(
                "{} predictors with positive score, need more than kappa = {}",
                gamma.support.size(),
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Runs one annealing chain and returns every model it evaluated.
///
/// At temperature `t` a swap is accepted with probability `min(1, q)`,
/// `q = exp((mse_cur − mse_cand)/t) · p(S′→S)/p(S→S′)`. Models with a
/// singular Gram matrix get infinite MSE and are never accepted.
pub fn run_annealing<F: Scalar>(
    data: &Dataset<F>,
    gamma: &GammaScores<F>,
    config: &AnnealingConfig<F>,
) -> Result<ModelPool<F>> {
    if gamma.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            found: gamma.p(),
        });
    }
    config.validate(data.n(), gamma)?;
    let mut rng = rng::stream(config.seed, &[]);
    let mut cache: HashMap<Model, F> = HashMap::new();
    let mut eval = |m: &Model| -> Result<F> {
        if let Some(&v) = cache.get(m) {
            return Ok(v);
        }
        let v = refit_mse(data, m)?;
        cache.insert(m.clone(), v);
        Ok(v)
    };

    let mut pool = ModelPool::new();
    let mut current = config.start.clone();
    let mut current_mse = eval(&current)?;
    pool.record(&current, current_mse, 0);

    let mut step = 0u64;
    for (&t, &iters) in config
        .schedule
        .temperatures
        .iter()
        .zip(&config.schedule.iters)
    {
        for _ in 0..iters {
            step += 1;
            let proposal = propose(&current, gamma, &mut rng)?;
            let candidate = current.swap(proposal.removed, proposal.added);
            let candidate_mse = eval(&candidate)?;
            if config.record_candidates {
                pool.record(&candidate, candidate_mse, step);
            }
            let q = acceptance_ratio(current_mse, candidate_mse, t, &proposal);
            if q > F::zero() && accept(q, &mut rng) {
                current = candidate;
                current_mse = candidate_mse;
                if !config.record_candidates {
                    pool.record(&current, current_mse, step);
                }
            }
        }
    }
    Ok(pool)
}

/// Seed of chain `start_index` at size `kappa`.
pub fn chain_seed(seed: u64, kappa: usize, start_index: usize) -> u64 {
    rng::derive_seed(seed, &[kappa as u64, start_index as u64, 1])
}

/// Draws `kappa` distinct predictors from `A_γ` with probability ∝ γ,
/// without replacement.
pub fn draw_start<F: Scalar>(gamma: &GammaScores<F>, kappa: usize, rng: &mut Rng) -> Result<Model> {
    let mut pool: Vec<usize> = gamma.support.indices().to_vec();
    if pool.len() < kappa {
        return Err(Error::InvalidConfig(format!(
            "cannot draw {kappa} predictors from {} with positive score",
            pool.len()
        )));
    }
    let mut chosen = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let total: f64 = pool.iter().map(|&j| gamma.get(j).as_f64()).sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (k, &j) in pool.iter().enumerate() {
            acc += gamma.get(j).as_f64();
            if u < acc {
                pick = k;
                break;
            }
        }
        chosen.push(pool.remove(pick));
    }
    Model::new(chosen)
}

/// Start model of chain `start_index` at size `kappa`.
pub fn chain_start<F: Scalar>(
    gamma: &GammaScores<F>,
    seed: u64,
    kappa: usize,
    start_index: usize,
) -> Result<Model> {
    let mut r = rng::stream(seed, &[kappa as u64, start_index as u64, 0]);
    draw_start(gamma, kappa, &mut r)
}

#[derive(Debug, Clone)]
pub struct ChainResult<F> {
    pub kappa: usize,
    pub start_index: usize,
    pub start: Model,
    pub pool: ModelPool<F>,
}

/// Runs `starts_per_kappa` chains for every size in `kappas`, in parallel.
/// Results come back ordered by `(kappa, start_index)` as listed.
pub fn run_chains<F: Scalar>(
    data: &Dataset<F>,
    gamma: &GammaScores<F>,
    kappas: &[usize],
    starts_per_kappa: usize,
    opts: &SearchOptions<F>,
) -> Result<Vec<ChainResult<F>>> {
    if starts_per_kappa == 0 {
        return Err(Error::InvalidConfig(
            "need at least one start per size".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = kappas
        .iter()
        .flat_map(|&k| (0..starts_per_kappa).map(move |s| (k, s)))
        .collect();
    jobs.par_iter()
        .map(|&(kappa, s)| {
            let start = chain_start(gamma, opts.seed, kappa, s)?;
            let config = AnnealingConfig {
                kappa,
                schedule: opts.schedule.clone(),
                start: start.clone(),
                seed: chain_seed(opts.seed, kappa, s),
                record_candidates: opts.record_candidates,
            };
            let pool = run_annealing(data, gamma, &config)?;
            Ok(ChainResult {
                kappa,
                start_index: s,
                start,
                pool,
            })
        })
        .collect()
}

/// Union of the pools of all chains from [`run_chains`].
pub fn multi_start_search<F: Scalar>(
    data: &Dataset<F>,
    gamma: &GammaScores<F>,
    kappas: &[usize],
    starts_per_kappa: usize,
    opts: &SearchOptions<F>,
) -> Result<ModelPool<F>> {
    let chains = run_chains(data, gamma, kappas, starts_per_kappa, opts)?;
    let mut pool = ModelPool::new();
    for c in &chains {
        pool.merge(&c.pool);
    }
    Ok(pool)
}
