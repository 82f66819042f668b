use super::{Interval, NumericsError};

const MAX_BISECTIONS: usize = 2000;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of a monotone function by bisection.
///
/// Returns the midpoint of the final bracket, whose width is at most `tol`
/// (or as small as floating point allows).
pub fn bisect_root<F>(mut f: F, bracket: Interval, tol: f64) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Outcome of [`bisect_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Smallest value found at which the predicate holds (the upper bracket end).
    pub value: f64,
    /// Largest value known to fail the predicate.
    pub lo: f64,
    pub iterations: usize,
}

impl Threshold {
    pub fn bracket_width(&self) -> f64 {
        self.value - self.lo
    }

    pub fn relative_width(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.bracket_width() / self.value.abs()
        }
    }
}

/// Locate the switch point of a monotone predicate (false below, true above).
///
/// Halves the bracket until `(hi - lo) / hi <= rel_tol`, keeping `hi` on the
/// true side. If the predicate already holds at `lo`, `lo` is returned.
pub fn bisect_threshold<P>(mut predicate: P, bracket: Interval, rel_tol: f64) -> Result<Threshold, NumericsError>
where
    P: FnMut(f64) -> bool,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    if !predicate(hi) {
        return Err(NumericsError::ThresholdNotBracketed { lo, hi });
    }
    if predicate(lo) {
        return Ok(Threshold {
            value: lo,
            lo,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && hi - lo > rel_tol * hi.abs() {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if predicate(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        value: hi,
        lo,
        iterations,
    })
}

/// Outcome of [`minimize_convex_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// The objective showed no variation between the first probes and the result.
    pub flat: bool,
}

/// Golden-section search for the minimizer of a convex function on `bracket`.
///
/// `+inf` values are ordered above every finite value, so objectives that blow
/// up towards the bracket ends are fine as long as the probes inside are
/// finite. NaN, or two infinite probes at once, is reported as `NonFinite`.
pub fn minimize_convex_1d<F>(mut f: F, bracket: Interval, tol: f64) -> Result<Minimum, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            Err(NumericsError::NonFinite { x })
        } else {
            Ok(v)
        }
    };

    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let first = (fc, fd);
    let mut iterations = 0;

    while b - a > tol && iterations < MAX_BISECTIONS {
        if fc.is_infinite() && fd.is_infinite() {
            return Err(NumericsError::NonFinite { x: c });
        }
        if c >= d || c <= a || d >= b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else if fc > fd {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        } else {
            // Equal probes: a convex function attains its minimum between them.
            a = c;
            b = d;
            c = b - INV_PHI * (b - a);
            d = a + INV_PHI * (b - a);
            fc = eval(c)?;
            fd = eval(d)?;
        }
        iterations += 1;
    }

    let x = a + 0.5 * (b - a);
    let value = eval(x)?;
    let scale = first.0.abs().max(first.1.abs()).max(value.abs());
    let spread = (first.0 - value).abs().max((first.1 - value).abs());
    let flat = value.is_finite() && spread <= 1e-14 * scale;
    Ok(Minimum {
        x,
        value,
        iterations,
        flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn bisect_root_linear() {
        let x = bisect_root(|x| x - 3.0, iv(0.0, 10.0), 1e-9).unwrap();
        assert!((x - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn bisect_root_cube_root_of_two() {
        let x = bisect_root(|x| x * x * x - 2.0, iv(0.0, 2.0), 1e-12).unwrap();
        assert!((x - 1.259_921_049_894_873_2).abs() <= 1e-12, "{x}");
    }

    #[test]
    fn bisect_root_symmetric_bracket() {
        assert_eq!(bisect_root(|x| x, iv(-1.0, 1.0), 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn bisect_root_same_sign_is_error() {
        let err = bisect_root(|x| x * x + 1.0, iv(-1.0, 1.0), 1e-9).unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }));
    }

    #[test]
    fn bisect_root_decreasing_function() {
        let x = bisect_root(|x| 1.0 - x, iv(0.0, 4.0), 1e-12).unwrap();
        assert!((x - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn threshold_step_predicate() {
        let t = bisect_threshold(|x| x >= 5.0, iv(0.0, 10.0), 1e-6).unwrap();
        assert!((t.value - 5.0).abs() <= 5e-6, "{t:?}");
        assert!(t.value >= 5.0);
        assert!(t.relative_width() <= 1e-6);
    }

    #[test]
    fn threshold_sqrt_two() {
        let t = bisect_threshold(|x| x * x >= 2.0, iv(0.0, 2.0), 1e-9).unwrap();
        assert!((t.value - 2f64.sqrt()).abs() <= 2e-9, "{t:?}");
    }

    #[test]
    fn threshold_always_true_returns_lo() {
        let t = bisect_threshold(|_| true, iv(1.0, 3.0), 1e-6).unwrap();
        assert_eq!(t.value, 1.0);
        assert_eq!(t.iterations, 0);
    }

    #[test]
    fn threshold_requires_true_upper_end() {
        let err = bisect_threshold(|x| x > 100.0, iv(0.0, 10.0), 1e-6).unwrap_err();
        assert!(matches!(err, NumericsError::ThresholdNotBracketed { .. }));
    }

    #[test]
    fn threshold_from_zero_terminates() {
        let t = bisect_threshold(|x| x >= 1e-3, iv(0.0, 1.0), 1e-3).unwrap();
        assert!(t.iterations < 60);
        assert!((t.value - 1e-3).abs() <= 1e-6);
    }

    #[test]
    fn golden_quadratic() {
        let m = minimize_convex_1d(|x| (x - 1.0) * (x - 1.0), iv(0.0, 3.0), 1e-9).unwrap();
        assert!((m.x - 1.0).abs() <= 1e-9, "{m:?}");
        assert!(!m.flat);
    }

    #[test]
    fn golden_exponential_pair() {
        // d/dx (e^x + e^{-2x}) = 0  =>  x = ln(2)/3
        let m = minimize_convex_1d(|x| x.exp() + (-2.0 * x).exp(), iv(-2.0, 2.0), 1e-10).unwrap();
        assert!((m.x - 0.231_049_060_186_648_4).abs() <= 1e-9, "{m:?}");
    }

    #[test]
    fn golden_constant_is_flagged_flat() {
        let m = minimize_convex_1d(|_| 4.0, iv(-1.0, 1.0), 1e-8).unwrap();
        assert!(m.flat);
        assert!((-1.0..=1.0).contains(&m.x));
        assert_eq!(m.value, 4.0);
    }

    #[test]
    fn golden_tolerates_infinite_tails() {
        let f = |x: f64| {
            if x <= 0.0 || x >= 1.0 {
                f64::INFINITY
            } else {
                1.0 / x + 1.0 / (1.0 - x)
            }
        };
        let m = minimize_convex_1d(f, iv(0.0, 1.0), 1e-10).unwrap();
        assert!((m.x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn golden_rejects_nan() {
        let err = minimize_convex_1d(|_| f64::NAN, iv(0.0, 1.0), 1e-6).unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite { .. }));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn golden_recovers_vertex(v in -5.0f64..5.0, c in 0.01f64..100.0) {
                let m = minimize_convex_1d(|x| c * (x - v) * (x - v), iv(-10.0, 10.0), 1e-8).unwrap();
                prop_assert!((m.x - v).abs() <= 1e-8);
            }

            #[test]
            fn golden_lands_on_offset_plateau(v in -5.0f64..5.0, c in 0.01f64..100.0) {
                // With the offset, f rounds to exactly 1 within sqrt(eps / c) of
                // the vertex, so no comparison can resolve v more finely.
                let m = minimize_convex_1d(|x| c * (x - v) * (x - v) + 1.0, iv(-10.0, 10.0), 1e-8).unwrap();
                let plateau = (4.0 * f64::EPSILON / c).sqrt();
                prop_assert!((m.x - v).abs() <= 1e-8 + plateau);
                prop_assert!(m.value <= 1.0 + 2.0 * f64::EPSILON);
            }

            #[test]
            fn threshold_brackets_switch_point(t0 in 0.5f64..99.0, tol in 1e-9f64..1e-2) {
                let t = bisect_threshold(|x| x >= t0, iv(0.0, 100.0), tol).unwrap();
                prop_assert!(t.value >= t0);
                prop_assert!(t.value * (1.0 + tol) >= t0);
                prop_assert!(t.value * (1.0 - tol) < t0);
            }
        }
    }
}
