//! Random search over fixed-size models.

mod anneal;
mod pool;
mod proposal;

pub use anneal::{
    chain_seed, chain_start, draw_start, multi_start_search, run_annealing, run_chains,
    AnnealingConfig, ChainResult, Schedule, SearchOptions,
};
pub use pool::{ModelPool, PoolEntry};
pub use proposal::{
    accept, acceptance_ratio, addition_probs, propose, removal_probs, swap_probability,
    SwapProposal, EXPONENT_CLAMP,
};
