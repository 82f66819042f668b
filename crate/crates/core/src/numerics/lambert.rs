use std::f64::consts::E;

use super::NumericsError;

const BRANCH_POINT: f64 = -1.0 / E;
const MAX_HALLEY_STEPS: usize = 64;

/// Lower real branch of the Lambert W function.
///
/// Returns the unique `w <= -1` with `w * exp(w) == x` for `x` in
/// `[-1/e, 0)`. Arguments that fall below `-1/e` by no more than a few ulps
/// are treated as the branch point itself, since `w * exp(w)` evaluated in
/// floating point at `w = -1` can land there.
pub fn lambert_w_m1(x: f64) -> Result<f64, NumericsError> {
    if !x.is_finite() || x >= 0.0 {
        return Err(NumericsError::Domain {
            function: "lambert_w_m1",
            x,
            reason: "argument must lie in [-1/e, 0)",
        });
    }
    // 1 + e*x measures the distance from the branch point.
    let gap = E.mul_add(x, 1.0);
    if gap < -8.0 * f64::EPSILON {
        return Err(NumericsError::Domain {
            function: "lambert_w_m1",
            x,
            reason: "argument below the branch point -1/e",
        });
    }
    if gap <= 0.0 || x == BRANCH_POINT {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x, gap);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1);
        let next = (w - step).min(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * w.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64, gap: f64) -> f64 {
    if gap < 0.25 {
        // Puiseux series around the branch point, taking the negative root.
        let p = -(2.0 * gap).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        (l1 - l2 + l2 / l1).min(-1.0)
    }
}
