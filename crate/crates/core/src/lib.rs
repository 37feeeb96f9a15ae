//! Minimal classes of near-optimal linear models.
//!
//! Predictors are scored from a cross-validated Lasso, an Elastic Net and a
//! Lasso path with reduced penalty on the predictors only the Elastic Net
//! picked. A simulated-annealing search over fixed-size subsets then uses
//! those scores to propose swaps, and every visited model is kept in a pool.
//! The pool yields, per size, the models whose MSE is within `η` of the best.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`).
//!
//! ```
//! use modelclass::{score_predictors, multi_start_search, standardize, RawTable, ScoringOptions, SearchOptions};
//! use ndarray::{Array1, Array2};
//!
//! let n = 40;
//! let x = Array2::from_shape_fn((n, 6), |(i, j)| ((i * 7 + j * 13) % 11) as f64 - 5.0 + (j as f64) * 0.1 * (i as f64).sin());
//! let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 1]] - x[[i, 4]] + 0.1 * (i as f64).cos());
//! let data = standardize(&RawTable::unnamed(x, y).unwrap()).unwrap();
//! let scores = score_predictors(&data, &ScoringOptions::default()).unwrap();
//! let pool = multi_start_search(&data, &scores.gamma, &[2], 1, &SearchOptions::default()).unwrap();
//! assert!(pool.of_size(2).count() > 0);
//! ```

pub mod data;
pub mod error;
pub mod expand;
pub mod io;
pub mod linalg;
pub mod lsq;
pub mod minclass;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod scoring;
pub mod search;
pub mod simulation;
pub mod solver;

pub use data::{standardize, standardize_with, Dataset, Normalization, RawTable};
pub use error::{Error, Result};
pub use expand::{expand_features, Expansion, ExpansionOptions};
pub use lsq::{fit_least_squares, refit_mse, LeastSquaresFit};
pub use minclass::{
    assemble_minimal_class, brute_force_minimal_class, estimate_noise_variance, frequency_matrix, top_m,
    unique_counts, FrequencyMatrix, MinimalClass,
};
pub use model::Model;
pub use scalar::Scalar;
pub use scoring::{score_predictors, GammaScores, ScoreReport, ScoringOptions};
pub use search::{multi_start_search, run_annealing, AnnealingConfig, ModelPool, Schedule, SearchOptions};
pub use simulation::{generate_scenario, run_study, RecoveryTable, ScenarioConfig, StudyOptions};
pub use solver::{cv_select_lambda, solve_penalized, PenaltySpec, SolverOptions, SparseFit};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type RawTable64 = RawTable<f64>;
pub type RawTable32 = RawTable<f32>;
pub type GammaScores64 = GammaScores<f64>;
pub type GammaScores32 = GammaScores<f32>;
pub type ModelPool64 = ModelPool<f64>;
pub type ModelPool32 = ModelPool<f32>;
pub type MinimalClass64 = MinimalClass<f64>;
pub type MinimalClass32 = MinimalClass<f32>;
