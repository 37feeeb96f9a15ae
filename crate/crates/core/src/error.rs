use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ConstantColumn(usize),
    #[error("input contains NaN or infinite values")]
    NonFinite,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Gram matrix is singular (condition estimate {condition:e})")]
    SingularGram { condition: f64 },
    #[error("cross-validation fold {fold} has {size} observations, need at least 2")]
    FoldTooSmall { fold: usize, size: usize },
    #[error("both the Lasso and the Elastic Net supports are empty")]
    EmptySupports,
    #[error("predictor {0} is in the current model but has gamma = 0")]
    ZeroGammaInState(usize),
    #[error("no predictor with positive gamma outside the current model")]
    NoCandidates,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("the pool holds no model of size {0}")]
    EmptySize(usize),
    #[error("enumeration needs {needed} fits, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("degenerate fit: n = {n} <= model size {kappa}")]
    DegenerateFit { n: usize, kappa: usize },
    #[error("search did not cover model size {0}")]
    MissingSize(usize),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
