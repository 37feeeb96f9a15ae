//! Lasso, weighted Lasso and Elastic Net solvers with cross-validated tuning.

mod cd;
mod cv;
mod penalty;

pub use cd::{
    kkt_violation, lambda1_max, objective, reduced_penalty_lasso, reduced_penalty_lasso_cached,
    soft_threshold, solve_penalized, solve_penalized_cached, GramCache, SolverOptions, SparseFit,
};
pub use cv::{
    cv_select_lambda, default_lambda_grid, fold_assignment, lambda_grid, lambda_max, CvPoint,
    CvResult, DEFAULT_GRID_LEN, DEFAULT_GRID_RATIO,
};
pub use penalty::PenaltySpec;

/// Default Elastic-Net mixing used when building predictor scores.
pub const DEFAULT_ENET_ALPHA: f64 = 0.4;
