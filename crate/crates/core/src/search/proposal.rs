//! Score-weighted swap proposals and the Metropolis–Hastings ratio.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::scoring::GammaScores;

/// Bound on `|Δmse / t|` before exponentiation.
pub const EXPONENT_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapProposal<F> {
    pub removed: usize,
    pub added: usize,
    /// `p(S → S′) = p_out(removed) · p_in(added)` evaluated at `S`.
    pub forward_prob: F,
    /// `p(S′ → S) = p_out(added) · p_in(removed)` evaluated at `S′`.
    pub backward_prob: F,
}

/// Removal probabilities over `state.indices()`, proportional to `1/γ`.
pub fn removal_probs<F: Scalar>(state: &Model, gamma: &GammaScores<F>) -> Result<Vec<F>> {
    let mut inv = Vec::with_capacity(state.size());
    for &j in state.indices() {
        let g = gamma.get(j);
        if !(g > F::zero()) {
            return Err(Error::ZeroGammaInState(j));
        }
        inv.push(F::one() / g);
    }
    let total = inv.iter().fold(F::zero(), |a, &b| a + b);
    Ok(inv.into_iter().map(|v| v / total).collect())
}

/// Addition candidates `A_γ \ state` with probabilities proportional to `γ`.
pub fn addition_probs<F: Scalar>(
    state: &Model,
    gamma: &GammaScores<F>,
) -> Result<(Vec<usize>, Vec<F>)> {
    let cands: Vec<usize> = gamma
        .support
        .indices()
        .iter()
        .copied()
        .filter(|&j| !state.contains(j))
        .collect();
    if cands.is_empty() {
        return Err(Error::NoCandidates);
    }
    let total = cands.iter().fold(F::zero(), |a, &j| a + gamma.get(j));
    let probs = cands.iter().map(|&j| gamma.get(j) / total).collect();
    Ok((cands, probs))
}

fn removal_prob<F: Scalar>(state: &Model, j: usize, gamma: &GammaScores<F>) -> F {
    let total = state
        .indices()
        .iter()
        .fold(F::zero(), |a, &u| a + F::one() / gamma.get(u));
    (F::one() / gamma.get(j)) / total
}

fn addition_prob<F: Scalar>(state: &Model, j: usize, gamma: &GammaScores<F>) -> F {
    let total = gamma
        .support
        .indices()
        .iter()
        .filter(|&&u| !state.contains(u))
        .fold(F::zero(), |a, &u| a + gamma.get(u));
    gamma.get(j) / total
}

/// Probability of proposing the swap `removed → added` from `state`.
pub fn swap_probability<F: Scalar>(
    state: &Model,
    removed: usize,
    added: usize,
    gamma: &GammaScores<F>,
) -> F {
    removal_prob(state, removed, gamma) * addition_prob(state, added, gamma)
}

/// Index drawn from a probability vector by inversion.
pub(crate) fn sample_index<F: Scalar>(probs: &[F], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return i;
        }
    }
    // rounding left the total just under 1
    probs.iter().rposition(|p| *p > F::zero()).unwrap_or(0)
}

/// Draws one swap from `state`.
pub fn propose<F: Scalar>(
    state: &Model,
    gamma: &GammaScores<F>,
    rng: &mut Rng,
) -> Result<SwapProposal<F>> {
    let out = removal_probs(state, gamma)?;
    let (cands, inp) = addition_probs(state, gamma)?;
    let r = sample_index(&out, rng);
    let a = sample_index(&inp, rng);
    let removed = state.indices()[r];
    let added = cands[a];
    let next = state.swap(removed, added);
    Ok(SwapProposal {
        removed,
        added,
        forward_prob: out[r] * inp[a],
        backward_prob: swap_probability(&next, added, removed, gamma),
    })
}

/// `q = exp((mse_cur − mse_cand)/t) · p(S′→S)/p(S→S′)`.
///
/// The exponent is clamped to `±700`. An infinite candidate MSE gives `q = 0`.
pub fn acceptance_ratio<F: Scalar>(
    current_mse: F,
    candidate_mse: F,
    t: F,
    proposal: &SwapProposal<F>,
) -> F {
    if !candidate_mse.is_finite() {
        return F::zero();
    }
    let lim = F::lit(EXPONENT_CLAMP);
    let mut e = (current_mse - candidate_mse) / t;
    if e.is_nan() {
        e = F::zero();
    }
    let e = e.max(-lim).min(lim);
    e.exp() * proposal.backward_prob / proposal.forward_prob
}

/// Accepts with probability `min(1, q)`; `q ≥ 1` never consumes a draw.
pub fn accept<F: Scalar>(q: F, rng: &mut Rng) -> bool {
    if q >= F::one() {
        return true;
    }
    let u: f64 = rng.random();
    u < q.as_f64()
}
