//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exhaustive routine was asked to run beyond its size guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Numerical breakdown inside a linear solver. Distinct from a clean
    /// infeasibility verdict, which is a value, not an error.
    #[error("solver breakdown: {0}")]
    SolverBreakdown(String),

    /// A routine requiring a feasible starting point was handed an
    /// infeasible one.
    #[error("infeasible starting point: {0}")]
    InfeasibleStart(String),

    /// The partial-coloring potential condition failed. This is the
    /// phased solver's abort signal.
    #[error("partial coloring request rejected: potential {potential:.6e} exceeds limit {limit:.6e}")]
    RequestRejected { potential: f64, limit: f64 },

    /// Two independent decision routes inside an oracle disagreed.
    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
