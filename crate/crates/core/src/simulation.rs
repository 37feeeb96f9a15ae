//! Synthetic benchmark with four competing "true" models.
//!
//! `y = Xβ + ε`, `ε ~ N(0, I)`, `β_j = C` for the first six predictors.
//! Predictors are iid standard normal except
//! `X7 = ⅔(X1 + X2) + ξ₁` and `X8 = ⅔(X3 + X4) + ξ₂`, `ξ ~ N(0, ⅓ I)`,
//! which makes {5,6,7,8} a four-predictor substitute for {1,…,6}.

use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::{standardize, RawTable};
use crate::error::{Error, Result};
use crate::minclass::top_m;
use crate::model::Model;
use crate::rng;
use crate::scalar::Scalar;
use crate::scoring::{score_predictors, ScoringOptions};
use crate::search::{multi_start_search, ModelPool, SearchOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(p: usize, snr: f64, replicates: usize, seed: u64) -> Self {
        ScenarioConfig {
            n: 100,
            p,
            snr,
            replicates,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p <= 8 {
            return Err(Error::InvalidConfig(format!(
                "p = {} must exceed 8",
                self.p
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "snr {} must be positive",
                self.snr
            )));
        }
        if self.n < 3 {
            return Err(Error::InvalidConfig(format!("n = {} too small", self.n)));
        }
        Ok(())
    }
}

/// The four target models, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetModels {
    pub models: [Model; 4],
}

pub const TARGET_LABELS: [&str; 4] = ["(I)", "(II)", "(III)", "(IV)"];

impl Default for TargetModels {
    fn default() -> Self {
        let m = |v: &[usize]| Model::new(v.iter().map(|j| j - 1).collect()).expect("distinct");
        TargetModels {
            models: [
                m(&[1, 2, 3, 4, 5, 6]),
                m(&[5, 6, 7, 8]),
                m(&[3, 4, 5, 6, 7]),
                m(&[1, 2, 5, 6, 8]),
            ],
        }
    }
}

impl TargetModels {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.models.iter().map(Model::size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Coefficient size giving signal variance `6C²` equal to `snr` (noise variance 1).
pub fn snr_to_coefficient(snr: f64) -> f64 {
    (snr / 6.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub coefficient: f64,
    pub beta: Vec<f64>,
    pub replicate: usize,
}

/// One simulated dataset; identical for identical `(cfg.seed, replicate)`.
pub fn generate_scenario<F: Scalar>(
    cfg: &ScenarioConfig,
    replicate: usize,
) -> Result<(RawTable<F>, Truth)> {
    cfg.validate()?;
    let (n, p) = (cfg.n, cfg.p);
    let mut r = rng::stream(cfg.seed, &[replicate as u64, 0x5E]);
    let mut x = Array2::<f64>::zeros((n, p));
    for v in x.iter_mut() {
        *v = r.sample(StandardNormal);
    }
    let xi_sd = (1.0_f64 / 3.0).sqrt();
    for i in 0..n {
        let xi1: f64 = r.sample(StandardNormal);
        let xi2: f64 = r.sample(StandardNormal);
        x[[i, 6]] = 2.0 / 3.0 * (x[[i, 0]] + x[[i, 1]]) + xi_sd * xi1;
        x[[i, 7]] = 2.0 / 3.0 * (x[[i, 2]] + x[[i, 3]]) + xi_sd * xi2;
    }
    let c = snr_to_coefficient(cfg.snr);
    let beta: Vec<f64> = (0..p).map(|j| if j < 6 { c } else { 0.0 }).collect();
    let y = Array1::from_shape_fn(n, |i| {
        let signal: f64 = (0..6).map(|j| x[[i, j]] * c).sum();
        signal + r.sample::<f64, _>(StandardNormal)
    });
    let table = RawTable::unnamed(x.mapv(F::lit), y.mapv(F::lit))?;
    Ok((
        table,
        Truth {
            coefficient: c,
            beta,
            replicate,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Outcome {
    pub is_best: bool,
    pub in_top: bool,
}

/// Whether each target is the best, or among the `top` best, of its size.
pub fn evaluate_recovery<F: Scalar>(
    pool: &ModelPool<F>,
    targets: &TargetModels,
    top: usize,
) -> Result<[Outcome; 4]> {
    let mut out = [Outcome::default(); 4];
    for (o, target) in out.iter_mut().zip(&targets.models) {
        let ranked = top_m(pool, target.size(), top.max(1));
        if ranked.is_empty() {
            return Err(Error::MissingSize(target.size()));
        }
        o.is_best = ranked[0].0 == *target;
        o.in_top = ranked.iter().any(|(m, _)| m == target);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct StudyOptions<F> {
    pub scoring: ScoringOptions<F>,
    pub search: SearchOptions<F>,
    pub kappas: Vec<usize>,
    pub starts: usize,
    pub top: usize,
}

impl<F: Scalar> Default for StudyOptions<F> {
    fn default() -> Self {
        StudyOptions {
            scoring: ScoringOptions::default(),
            search: SearchOptions::default(),
            kappas: vec![4, 5, 6],
            starts: 3,
            top: 5,
        }
    }
}

/// Result of one replicate; `None` when scoring or search could not run.
pub fn run_replicate<F: Scalar>(
    cfg: &ScenarioConfig,
    replicate: usize,
    opts: &StudyOptions<F>,
    targets: &TargetModels,
) -> Result<Option<[Outcome; 4]>> {
    let (raw, _) = generate_scenario::<F>(cfg, replicate)?;
    let data = standardize(&raw)?;
    let mut scoring = opts.scoring.clone();
    scoring.seed = rng::derive_seed(cfg.seed, &[replicate as u64, 0x5C]);
    let gamma = match score_predictors(&data, &scoring) {
        Ok(r) => r.gamma,
        Err(Error::EmptySupports) => return Ok(None),
        Err(e) => return Err(e),
    };
    let kappas: Vec<usize> = opts
        .kappas
        .iter()
        .copied()
        .filter(|&k| gamma.support.size() > k)
        .collect();
    if kappas.is_empty() {
        return Ok(None);
    }
    let mut search = opts.search.clone();
    search.seed = rng::derive_seed(cfg.seed, &[replicate as u64, 0x5A]);
    let pool = multi_start_search(&data, &gamma, &kappas, opts.starts, &search)?;
    let mut out = [Outcome::default(); 4];
    for (o, target) in out.iter_mut().zip(&targets.models) {
        // a size the search could not cover counts as not recovered
        let ranked = top_m(&pool, target.size(), opts.top);
        if let Some(first) = ranked.first() {
            o.is_best = first.0 == *target;
            o.in_top = ranked.iter().any(|(m, _)| m == target);
        }
    }
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub prop_best: f64,
    pub se_best: f64,
    pub prop_top: f64,
    pub se_top: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryCell {
    pub p: usize,
    pub snr: f64,
    pub replicates: usize,
    /// Replicates where scoring left too few predictors to search.
    pub incomplete: usize,
    pub rates: [Rate; 4],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoveryTable {
    pub cells: Vec<RecoveryCell>,
}

fn rate(hits: usize, total: usize) -> (f64, f64) {
    if total == 0 {
        return (0.0, 0.0);
    }
    let p = hits as f64 / total as f64;
    (p, (p * (1.0 - p) / total as f64).sqrt())
}

/// Runs every replicate of every cell; replicates run in parallel.
pub fn run_study<F: Scalar>(
    cells: &[ScenarioConfig],
    opts: &StudyOptions<F>,
) -> Result<RecoveryTable> {
    let targets = TargetModels::default();
    let mut table = RecoveryTable::default();
    for cfg in cells {
        cfg.validate()?;
        let outcomes: Vec<Option<[Outcome; 4]>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, r, opts, &targets))
            .collect::<Result<_>>()?;
        let total = outcomes.len();
        let incomplete = outcomes.iter().filter(|o| o.is_none()).count();
        let mut rates = [Rate {
            prop_best: 0.0,
            se_best: 0.0,
            prop_top: 0.0,
            se_top: 0.0,
        }; 4];
        for (t, r) in rates.iter_mut().enumerate() {
            let best = outcomes.iter().flatten().filter(|o| o[t].is_best).count();
            let top = outcomes.iter().flatten().filter(|o| o[t].in_top).count();
            (r.prop_best, r.se_best) = rate(best, total);
            (r.prop_top, r.se_top) = rate(top, total);
        }
        table.cells.push(RecoveryCell {
            p: cfg.p,
            snr: cfg.snr,
            replicates: total,
            incomplete,
            rates,
        });
    }
    Ok(table)
}

impl RecoveryTable {
    pub fn cell(&self, p: usize, snr: f64) -> Option<&RecoveryCell> {
        self.cells.iter().find(|c| c.p == p && c.snr == snr)
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("p,snr,model,prop_best,se_best,prop_top5,se_top5,replicates,incomplete\n");
        for c in &self.cells {
            for (label, r) in TARGET_LABELS.iter().zip(&c.rates) {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.4},{:.4},{:.4},{:.4},{},{}",
                    c.p,
                    c.snr,
                    label,
                    r.prop_best,
                    r.se_best,
                    r.prop_top,
                    r.se_top,
                    c.replicates,
                    c.incomplete
                );
            }
        }
        s
    }

    /// Plain-text layout: one block per SNR, one column pair per `p`.
    pub fn to_text(&self) -> String {
        let mut ps: Vec<usize> = self.cells.iter().map(|c| c.p).collect();
        ps.sort_unstable();
        ps.dedup();
        let mut snrs: Vec<f64> = self.cells.iter().map(|c| c.snr).collect();
        snrs.sort_by(f64::total_cmp);
        snrs.dedup();
        let mut s = String::new();
        let _ = write!(s, "{:>6} {:>6}", "SNR", "Model");
        for p in &ps {
            let _ = write!(s, " | p={:<5} {:>5} {:>6}", p, "Best", "Top 5");
        }
        s.push('\n');
        for snr in &snrs {
            for (t, label) in TARGET_LABELS.iter().enumerate() {
                let _ = write!(
                    s,
                    "{:>6} {:>6}",
                    if t == 0 {
                        format!("{snr}")
                    } else {
                        String::new()
                    },
                    label
                );
                for p in &ps {
                    match self.cell(*p, *snr) {
                        Some(c) => {
                            let _ = write!(
                                s,
                                " | {:7} {:>5.2} {:>6.2}",
                                "", c.rates[t].prop_best, c.rates[t].prop_top
                            );
                        }
                        None => {
                            let _ = write!(s, " | {:7} {:>5} {:>6}", "", "-", "-");
                        }
                    }
                }
                s.push('\n');
            }
        }
        s
    }
}
