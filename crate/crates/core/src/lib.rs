//! Discrepancy minimization for random low-degree set systems.
//!
//! The crate models set systems where every element belongs to exactly `t`
//! of `m` sets, and provides several routes to low-discrepancy colorings:
//!
//! * [`beck_fiala`] — classical iterative LP rounding with the hard
//!   `2t - 1` guarantee,
//! * [`partial_coloring`] — a constrained Gaussian walk that freezes at
//!   least half of the variables while respecting per-row budgets,
//! * [`phased`] — the budgeted multi-phase solver built on top of both,
//! * [`reduction`] — a column-reduction pipeline (tail rounding plus LP
//!   head matching) and polytope containment checks,
//! * [`oracles`] — deliberately naive reference implementations used by
//!   tests and the acceptance suite.
//!
//! All randomized components are seed-deterministic: the same seed yields
//! the same output, regardless of thread count in the callers.

pub mod beck_fiala;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod oracles;
pub mod partial_coloring;
pub mod phased;
pub mod reduction;
pub mod rng;
pub mod set_system;

pub use error::{Error, Result};
pub use set_system::{Coloring, DiscrepancyVector, SetSystem};

/// Default numeric tolerance used by every pipeline unless overridden.
pub const DEFAULT_TOL: f64 = 1e-8;
