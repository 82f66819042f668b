//! Scalar special functions and one-dimensional search primitives.
//!
//! Everything here is a pure function of its arguments. Tolerances are always
//! explicit; the `DEFAULT_*` constants are the values the solver uses when the
//! caller has no reason to pick something else.

mod lambert;
mod search;

pub use lambert::lambert_w_m1;
pub use search::{Minimum, Threshold, bisect_root, bisect_threshold, minimize_convex_1d};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for scalar root finding.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Relative tolerance for threshold (feasibility) bisection.
pub const DEFAULT_THRESHOLD_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("argument {x} outside the domain of {function}: {reason}")]
    Domain {
        function: &'static str,
        x: f64,
        reason: &'static str,
    },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("predicate is false at the upper end of [{lo}, {hi}]")]
    ThresholdNotBracketed { lo: f64, hi: f64 },
    #[error("objective is not finite at x = {x}")]
    NonFinite { x: f64 },
}

/// A closed, finite interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(NumericsError::InvalidInterval { lo, hi })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `n` evenly spaced points strictly inside the interval (cell midpoints).
    pub fn interior_grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.width() / n as f64;
        (0..n).map(move |i| self.lo + (i as f64 + 0.5) * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_degenerate_bounds() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let iv = Interval::new(-1.0, 3.0).unwrap();
        assert_eq!(iv.width(), 4.0);
        assert_eq!(iv.midpoint(), 1.0);
    }

    #[test]
    fn interior_grid_stays_inside() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let pts: Vec<f64> = iv.interior_grid(4).collect();
        assert_eq!(pts, vec![0.125, 0.375, 0.625, 0.875]);
    }
}
