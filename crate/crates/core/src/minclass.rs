//! Minimal classes, ranked lists and co-occurrence summaries of a pool.
//!
//! Class membership is judged against the best MSE in the pool, not the
//! unknown global optimum, so every class is relative to the search that
//! produced it.

use itertools::Itertools;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lsq::refit_mse;
use crate::model::Model;
use crate::scalar::Scalar;
use crate::search::ModelPool;

/// Default cap on the number of fits an exhaustive enumeration may run.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;
/// Default `c` in `η = c · σ̂²`.
pub const DEFAULT_ETA_FACTOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalClass<F> {
    pub kappa: usize,
    pub eta: F,
    /// Members sorted by MSE, ties by index order.
    pub models: Vec<(Model, F)>,
    pub best_mse: F,
}

impl<F: Scalar> MinimalClass<F> {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn contains(&self, model: &Model) -> bool {
        self.models.iter().any(|(m, _)| m == model)
    }
}

fn within<F: Scalar>(ranked: Vec<(Model, F)>, kappa: usize, eta: F) -> Result<MinimalClass<F>> {
    let best_mse = ranked.first().map(|r| r.1).ok_or(Error::EmptySize(kappa))?;
    let limit = best_mse + eta;
    let models = ranked
        .into_iter()
        .take_while(|(_, v)| *v <= limit)
        .collect();
    Ok(MinimalClass {
        kappa,
        eta,
        models,
        best_mse,
    })
}

/// Pool models of size `kappa` whose MSE is within `eta` of the pool's best.
pub fn assemble_minimal_class<F: Scalar>(
    pool: &ModelPool<F>,
    kappa: usize,
    eta: F,
) -> Result<MinimalClass<F>> {
    if !(eta >= F::zero()) {
        return Err(Error::InvalidConfig(format!(
            "eta {eta} must be non-negative"
        )));
    }
    within(pool.ranked(kappa), kappa, eta)
}

/// The `m` best models of size `kappa` in the pool.
pub fn top_m<F: Scalar>(pool: &ModelPool<F>, kappa: usize, m: usize) -> Vec<(Model, F)> {
    let mut r = pool.ranked(kappa);
    r.truncate(m);
    r
}

/// `C(p, k)` without overflow for the sizes that matter here.
pub fn binomial(p: usize, k: usize) -> u128 {
    if k > p {
        return 0;
    }
    let k = k.min(p - k);
    (0..k).fold(1u128, |acc, i| acc * (p - i) as u128 / (i as u128 + 1))
}

/// Exact minimal class by fitting every model of size `kappa`.
pub fn brute_force_minimal_class<F: Scalar>(
    data: &Dataset<F>,
    kappa: usize,
    eta: F,
    budget: u128,
) -> Result<MinimalClass<F>> {
    let needed = binomial(data.p(), kappa);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let combos: Vec<Vec<usize>> = (0..data.p()).combinations(kappa).collect();
    let mut fits: Vec<(Model, F)> = combos
        .into_par_iter()
        .map(|c| {
            let m = Model::new(c)?;
            let v = refit_mse(data, &m)?;
            Ok((m, v))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, v)| v.is_finite())
        .collect();
    fits.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    within(fits, kappa, eta)
}

/// Joint membership counts of frequently selected predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    /// Predictors appearing in at least the threshold fraction of models.
    pub predictors: Vec<usize>,
    /// `counts[a][b]`: models containing both `predictors[a]` and `predictors[b]`.
    pub counts: Vec<Vec<usize>>,
    pub total_models: usize,
}

pub fn frequency_matrix(models: &[Model], threshold: f64) -> Result<FrequencyMatrix> {
    if models.is_empty() {
        return Err(Error::InvalidInput(
            "frequency matrix needs at least one model".into(),
        ));
    }
    let p = models
        .iter()
        .filter_map(|m| m.indices().last())
        .max()
        .map_or(0, |&j| j + 1);
    let mut marginal = vec![0usize; p];
    for m in models {
        for &j in m.indices() {
            marginal[j] += 1;
        }
    }
    let cut = threshold * models.len() as f64;
    let predictors: Vec<usize> = (0..p)
        .filter(|&j| marginal[j] > 0 && marginal[j] as f64 >= cut)
        .collect();
    let k = predictors.len();
    let mut counts = vec![vec![0usize; k]; k];
    for m in models {
        let present: Vec<usize> = (0..k).filter(|&a| m.contains(predictors[a])).collect();
        for &a in &present {
            for &b in &present {
                counts[a][b] += 1;
            }
        }
    }
    Ok(FrequencyMatrix {
        predictors,
        counts,
        total_models: models.len(),
    })
}

/// `σ̂² = n/(n − κ*) · mse*` where `mse*` is the best finite MSE in the pool
/// and `κ*` the size of that model.
pub fn estimate_noise_variance<F: Scalar>(data: &Dataset<F>, pool: &ModelPool<F>) -> Result<F> {
    let best = pool
        .iter()
        .filter(|(_, e)| e.mse.is_finite())
        .min_by(|a, b| {
            a.1.mse
                .partial_cmp(&b.1.mse)
                .expect("finite")
                .then_with(|| a.0.cmp(b.0))
        })
        .ok_or_else(|| Error::InvalidInput("pool has no model with finite MSE".into()))?;
    let n = data.n();
    let kappa = best.0.size();
    if n <= kappa {
        return Err(Error::DegenerateFit { n, kappa });
    }
    Ok(F::lit(n as f64) / F::lit((n - kappa) as f64) * best.1.mse)
}

/// Number of distinct models per size, ascending by size.
pub fn unique_counts<F: Scalar>(pool: &ModelPool<F>) -> Vec<(usize, usize)> {
    pool.sizes()
        .into_iter()
        .map(|k| (k, pool.of_size(k).count()))
        .collect()
}
