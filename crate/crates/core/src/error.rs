//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cost matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("cost matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("lower bound exceeds upper bound at index {index}")]
    InvalidBounds { index: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("objective is unbounded below over the feasible set")]
    Unbounded,

    #[error("unknown solver '{0}'; known solvers: {1}")]
    UnknownSolver(String, String),

    #[error("forecast length {got} does not match horizon {expected}")]
    ForecastLength { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("load profile covers {have_s:.3} s but {need_s:.3} s are required")]
    ProfileCoverage { need_s: f64, have_s: f64 },

    #[error("bus voltage {voltage:.1} V fell below the collapse floor at t = {time_s:.6} s")]
    BusCollapse { time_s: f64, voltage: f64 },

    #[error("voltage {voltage:.1} V is below the operating floor")]
    VoltageBelowFloor { voltage: f64 },

    #[error("dispatch infeasible: minimum constraint violation {violation:.6e}")]
    InfeasibleDispatch { violation: f64 },

    #[error("dispatch infeasible at receding step {step}: minimum violation {violation:.6e}")]
    MidRunInfeasible { step: usize, violation: f64 },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
