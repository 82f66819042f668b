//! Delay minimization over accuracy, transmit time and bandwidth.
//!
//! With CPU and transmit power pinned at their maxima, the problem for a
//! fixed deadline `T` reduces to: does some local accuracy `eta` need no more
//! than `B` Hz in total? Each user's bandwidth demand `u_k(v_k(eta))` is
//! convex in `eta`, so the inner check is a 1-D convex minimization
//! ([`check_feasible`]). Feasibility is monotone in `T`, so the outer problem is
//! a bisection on `T` ([`minimize_delay`]).

mod allocation;
mod baselines;
mod delay;
mod inner;

pub use allocation::{Allocation, Scheme, SolverInfo};
pub use baselines::{baseline_eb_fdma, baseline_fe_fdma, baseline_tdma};
pub use delay::{minimize_delay, solve, t_upper_bound};
pub use inner::{
    EtaStar, FeasibilityReport, bandwidth_derivative, check_feasible, eta_domain, required_bandwidth, required_rate,
    solve_eta_star, t_star, total_required_bandwidth,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::numerics::{DEFAULT_THRESHOLD_REL_TOL, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rate {rate} bits/s is not below the capacity ceiling {ceiling} bits/s")]
    AboveCapacity { rate: f64, ceiling: f64 },
    #[error("no transmit time left at eta = {eta}, T = {total_delay}: computation alone exhausts the deadline")]
    NoTransmitTime { eta: f64, total_delay: f64 },
    #[error("no local accuracy in (0, 1) is admissible for T = {total_delay}")]
    EmptyDomain { total_delay: f64 },
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("allocation violates its invariants: {0}")]
    Invariant(String),
}

/// How the inner minimization over `eta` is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerSearch {
    /// Golden-section search on the convex bandwidth demand.
    #[default]
    GoldenSection,
    /// Bisection on the sign of its derivative.
    DerivativeBisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop the outer bisection once `(T_hi - T_lo) / T_hi <= rel_tol`.
    pub rel_tol: f64,
    /// Absolute tolerance on `eta` in the inner search.
    pub eta_tol: f64,
    /// Absolute tolerance on the ends of the admissible `eta` interval.
    pub domain_tol: f64,
    pub inner: InnerSearch,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_THRESHOLD_REL_TOL,
            eta_tol: 1e-8,
            domain_tol: 1e-10,
            inner: InnerSearch::GoldenSection,
        }
    }
}

impl SolverOptions {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }
}
