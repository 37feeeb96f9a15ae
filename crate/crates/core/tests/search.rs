mod common;

use common::*;
use modelclass::lsq::refit_mse;
use modelclass::rng;
use modelclass::search::*;
use modelclass::simulation::{generate_scenario, ScenarioConfig, TargetModels};
use modelclass::{score_predictors, standardize, Dataset, GammaScores, Model, RawTable, ScoringOptions};
use ndarray::Array1;
use rand::seq::IndexedRandom;
use rand::Rng as _;

fn m(v: &[usize]) -> Model {
    Model::new(v.to_vec()).unwrap()
}

fn gamma(v: &[f64]) -> GammaScores<f64> {
    GammaScores::from_values(v.to_vec()).unwrap()
}

struct Fixture {
    gamma: Vec<f64>,
    state: Vec<usize>,
    removed: usize,
    added: usize,
    p_out: Vec<f64>,
    p_in: Vec<f64>,
    forward: f64,
    backward: f64,
    mse: (f64, f64, f64),
    q: f64,
}

fn fixtures() -> Vec<Fixture> {
    vec![
        // inverse scores 1, 2, 4 on the state; candidate scores 0.8, 0.4
        Fixture {
            gamma: vec![1.0, 0.5, 0.25, 0.8, 0.4],
            state: vec![0, 1, 2],
            removed: 2,
            added: 3,
            p_out: vec![1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0],
            p_in: vec![2.0 / 3.0, 1.0 / 3.0],
            forward: 8.0 / 21.0,
            backward: 25.0 / 221.0,
            mse: (0.5, 0.4, 0.2),
            q: 0.5f64.exp() * 525.0 / 1768.0,
        },
        // symmetric proposal
        Fixture {
            gamma: vec![0.5; 6],
            state: vec![0, 1],
            removed: 0,
            added: 4,
            p_out: vec![0.5, 0.5],
            p_in: vec![0.25; 4],
            forward: 0.125,
            backward: 0.125,
            mse: (0.6, 0.5, 10.0),
            q: 0.01f64.exp(),
        },
        // zero-score predictors are never candidates
        Fixture {
            gamma: vec![1.0, 0.5, 0.25, 0.0, 0.6, 0.0],
            state: vec![1, 2],
            removed: 1,
            added: 4,
            p_out: vec![1.0 / 3.0, 2.0 / 3.0],
            p_in: vec![0.625, 0.375],
            forward: 0.125,
            backward: 5.0 / 51.0,
            mse: (0.3, 0.35, 0.05),
            q: (-1.0f64).exp() * 40.0 / 51.0,
        },
    ]
}

#[test]
fn proposal_arithmetic_matches_hand_computation() {
    for f in fixtures() {
        let g = gamma(&f.gamma);
        let s = Model::new(f.state.clone()).unwrap();
        let out = removal_probs(&s, &g).unwrap();
        for (a, b) in out.iter().zip(&f.p_out) {
            assert!((a - b).abs() <= 1e-12);
        }
        let (_, inp) = addition_probs(&s, &g).unwrap();
        assert_eq!(inp.len(), f.p_in.len());
        for (a, b) in inp.iter().zip(&f.p_in) {
            assert!((a - b).abs() <= 1e-12);
        }
        let fwd = swap_probability(&s, f.removed, f.added, &g);
        let next = s.swap(f.removed, f.added);
        let bwd = swap_probability(&next, f.added, f.removed, &g);
        assert!((fwd - f.forward).abs() <= 1e-12);
        assert!((bwd - f.backward).abs() <= 1e-12);
        let prop = SwapProposal {
            removed: f.removed,
            added: f.added,
            forward_prob: fwd,
            backward_prob: bwd,
        };
        let q = acceptance_ratio(f.mse.0, f.mse.1, f.mse.2, &prop);
        assert!((q - f.q).abs() <= 1e-12, "{q} vs {}", f.q);

        // the sampler reports the same products for this swap
        let mut r = rng::stream(1, &[]);
        let hit = (0..10_000)
            .map(|_| propose(&s, &g, &mut r).unwrap())
            .find(|p| p.removed == f.removed && p.added == f.added)
            .unwrap();
        assert!((hit.forward_prob - f.forward).abs() <= 1e-12);
        assert!((hit.backward_prob - f.backward).abs() <= 1e-12);
    }
}

#[test]
fn acceptance_frequency_matches_min_one_q() {
    let mut r = rng::stream(2, &[]);
    let trials = 10_000;
    for q in [0.05, 0.3, 0.5, 0.75, 0.97] {
        let hits = (0..trials).filter(|_| accept(q, &mut r)).count();
        let freq = hits as f64 / trials as f64;
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((freq - q).abs() <= 3.0 * se, "q {q}: {freq}");
    }
    assert!((0..trials).all(|_| accept(1.0, &mut r)));
    assert!((0..1000).all(|_| accept(3.5, &mut r)));
    assert!(!(0..1000).any(|_| accept(0.0, &mut r)));
}

#[test]
fn replayed_transitions_reproduce_backward_probabilities() {
    let mut r = gen(3);
    let p = 15;
    let g: Vec<f64> = (0..p)
        .map(|j| if j % 5 == 4 { 0.0 } else { r.random_range(0.05..1.0) })
        .collect();
    let g = gamma(&g);
    let mut state = m(&[0, 1, 2, 3]);
    let mut chain = rng::stream(3, &[]);
    let mut accepted = 0;
    for _ in 0..5000 {
        let prop = propose(&state, &g, &mut chain).unwrap();
        let next = state.swap(prop.removed, prop.added);
        let fwd = swap_probability(&state, prop.removed, prop.added, &g);
        let bwd = swap_probability(&next, prop.added, prop.removed, &g);
        assert!((prop.forward_prob - fwd).abs() <= 1e-15 * fwd.max(1.0));
        assert_eq!(prop.backward_prob, bwd);
        assert!(g.get(prop.added) > 0.0);
        let q = acceptance_ratio(0.0, 0.0, 1.0, &prop);
        if accept(q, &mut chain) {
            // the reverse proposal from the new state undoes the move
            let back = swap_probability(&next, prop.added, prop.removed, &g);
            assert_eq!(back, prop.backward_prob);
            state = next;
            accepted += 1;
        }
    }
    assert!(accepted > 1000);
}

fn spanned(seed: u64) -> Dataset<f64> {
    spanned_problem(30, 10, 3, 7, seed)
}

#[test]
fn exact_pair_is_found_from_uniform_scores() {
    let g = gamma(&[0.5; 10]);
    let mut hits = 0;
    for seed in 0..100 {
        let d = spanned(seed);
        let opts = SearchOptions {
            seed,
            ..SearchOptions::default()
        };
        let pool = multi_start_search(&d, &g, &[2], 1, &opts).unwrap();
        let best = &pool.ranked(2)[0];
        if best.0 == m(&[3, 7]) {
            assert!(best.1 < 1e-20);
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits}/100");
}

#[test]
fn pool_stores_fresh_fit_errors() {
    let d = sparse_problem(40, 12, 3, 1.0, 0.5, 4);
    let g = gamma(&[0.7; 12]);
    let pool = multi_start_search(&d, &g, &[3, 4], 2, &SearchOptions::default()).unwrap();
    let entries: Vec<(&Model, &PoolEntry<f64>)> = pool.iter().collect();
    let mut r = gen(4);
    for (model, e) in entries.choose_multiple(&mut r, 100) {
        let fresh = refit_mse(&d, model).unwrap();
        assert!((fresh - e.mse).abs() <= 1e-10);
    }
    let unique: std::collections::BTreeSet<&Model> = entries.iter().map(|e| e.0).collect();
    assert_eq!(unique.len(), entries.len());
}

#[test]
fn target_is_reached_in_every_run() {
    let target = m(&[2, 5, 9]);
    let mut r = gen(5);
    let g: Vec<f64> = (0..12).map(|_| r.random_range(0.1..1.0)).collect();
    let g = gamma(&g);
    for seed in 0..50 {
        let mut r = gen(100 + seed);
        let x = normal_matrix(40, 12, &mut r);
        let y = normal_vec(40, &mut r);
        let d = standardize(&RawTable::unnamed(x, y).unwrap()).unwrap();
        let start = chain_start(&g, seed, 3, 0).unwrap();
        let config = AnnealingConfig {
            kappa: 3,
            schedule: Schedule::default().with_iters_scaled(5),
            start,
            seed,
            record_candidates: false,
        };
        let pool = run_annealing(&d, &g, &config).unwrap();
        assert!(pool.contains(&target), "seed {seed}");
    }
}

#[test]
fn zero_iterations_keep_only_the_start() {
    let d = spanned(1);
    let g = gamma(&[0.5; 10]);
    let config = AnnealingConfig {
        kappa: 2,
        schedule: Schedule::geometric(10.0, 0.7, 20, 0),
        start: m(&[0, 1]),
        seed: 1,
        record_candidates: true,
    };
    let pool = run_annealing(&d, &g, &config).unwrap();
    assert_eq!(pool.len(), 1);
    assert!(pool.contains(&m(&[0, 1])));
}

#[test]
fn runs_are_reproducible() {
    let d = sparse_problem(40, 20, 4, 1.0, 1.0, 6);
    let g: Vec<f64> = (0..20).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let g = gamma(&g);
    let opts = SearchOptions {
        seed: 77,
        ..SearchOptions::default()
    };
    let a = multi_start_search(&d, &g, &[3, 4], 3, &opts).unwrap();
    let b = multi_start_search(&d, &g, &[3, 4], 3, &opts).unwrap();
    assert_eq!(a, b);
    let other = SearchOptions { seed: 78, ..opts };
    assert_ne!(a, multi_start_search(&d, &g, &[3, 4], 3, &other).unwrap());
}

#[test]
fn single_chain_search_is_one_annealing_run() {
    let d = sparse_problem(40, 20, 4, 1.0, 1.0, 7);
    let g = gamma(&[0.4; 20]);
    let opts = SearchOptions {
        seed: 9,
        ..SearchOptions::default()
    };
    let multi = multi_start_search(&d, &g, &[4], 1, &opts).unwrap();
    let config = AnnealingConfig {
        kappa: 4,
        schedule: opts.schedule.clone(),
        start: chain_start(&g, 9, 4, 0).unwrap(),
        seed: chain_seed(9, 4, 0),
        record_candidates: true,
    };
    assert_eq!(multi, run_annealing(&d, &g, &config).unwrap());
}

#[test]
fn pool_holds_exactly_the_requested_sizes() {
    let d = sparse_problem(50, 25, 5, 1.0, 1.0, 8);
    let g = gamma(&[0.3; 25]);
    let pool = multi_start_search(&d, &g, &[4, 5, 6], 2, &SearchOptions::default()).unwrap();
    assert_eq!(pool.sizes(), vec![4, 5, 6]);
}

#[test]
fn invalid_configurations_are_rejected() {
    let d = spanned(2);
    let g = gamma(&[0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
    let base = AnnealingConfig {
        kappa: 2,
        schedule: Schedule::default(),
        start: m(&[0, 1]),
        seed: 0,
        record_candidates: true,
    };
    assert!(run_annealing(&d, &g, &base).is_ok());
    let bad_start = AnnealingConfig {
        start: m(&[0, 2]),
        ..base.clone()
    };
    assert!(run_annealing(&d, &g, &bad_start).is_err());
    let too_big = AnnealingConfig {
        kappa: 4,
        start: m(&[0, 1, 3, 7]),
        ..base.clone()
    };
    assert!(run_annealing(&d, &g, &too_big).is_err());
    let rising = AnnealingConfig {
        schedule: Schedule {
            temperatures: vec![1.0, 2.0],
            iters: vec![10, 10],
        },
        ..base.clone()
    };
    assert!(run_annealing(&d, &g, &rising).is_err());
    assert!(multi_start_search(&d, &g, &[2], 0, &SearchOptions::default()).is_err());
}

#[test]
fn extra_starts_improve_recovery_of_the_harder_targets() {
    let cfg = ScenarioConfig::new(50, 2.0, 100, 2024);
    let targets = TargetModels::default();
    let scoring = ScoringOptions::default();
    let (mut one, mut three) = (0usize, 0usize);
    for rep in 0..cfg.replicates {
        let (raw, _) = generate_scenario::<f64>(&cfg, rep).unwrap();
        let d = standardize(&raw).unwrap();
        let so = ScoringOptions {
            seed: rep as u64,
            ..scoring.clone()
        };
        let Ok(report) = score_predictors(&d, &so) else { continue };
        let g = report.gamma;
        if g.support.size() <= 5 {
            continue;
        }
        let opts = SearchOptions {
            seed: rng::derive_seed(cfg.seed, &[rep as u64]),
            ..SearchOptions::default()
        };
        for (starts, count) in [(1, &mut one), (3, &mut three)] {
            let pool = multi_start_search(&d, &g, &[5], starts, &opts).unwrap();
            let top: Vec<Model> = pool.ranked(5).into_iter().take(5).map(|e| e.0).collect();
            *count += targets.models[2..].iter().filter(|t| top.contains(t)).count();
        }
    }
    assert!(three > one, "three starts {three}, one start {one}");
}

#[test]
fn infinite_error_candidates_are_never_accepted() {
    // predictor 4 duplicates predictor 0, so any model holding both is singular
    let mut r = gen(10);
    let mut x = normal_matrix(30, 6, &mut r);
    let c = x.column(0).to_owned();
    x.column_mut(4).assign(&c);
    let y = Array1::from_shape_fn(30, |i| x[[i, 0]] + x[[i, 1]]);
    let d = Dataset::from_prepared(x, y).unwrap();
    let g = gamma(&[0.5; 6]);
    let config = AnnealingConfig {
        kappa: 2,
        schedule: Schedule::default(),
        start: m(&[0, 1]),
        seed: 3,
        record_candidates: false,
    };
    let pool = run_annealing(&d, &g, &config).unwrap();
    assert!(pool.iter().all(|(_, e)| e.mse.is_finite()));
    let all = run_annealing(&d, &g, &AnnealingConfig { record_candidates: true, ..config }).unwrap();
    assert!(all.get(&m(&[0, 4])).is_some_and(|e| e.mse.is_infinite()));
}
