use std::f64::consts::LN_2;

use serde::Serialize;

use super::{InnerSearch, OptimizerError, SolverOptions};
use crate::model::{Scenario, UserProfile, achievable_rate, capacity_ceiling};
use crate::numerics::{Interval, NumericsError, bisect_root, bisect_threshold, lambert_w_m1, minimize_convex_1d};

/// Longest transmit time that still meets deadline `total_delay` at accuracy
/// `eta`: the per-round budget minus the local computation time. Nonpositive
/// values mean `eta` is unusable for this deadline.
pub fn t_star(eta: f64, total_delay: f64, a: f64, workload: f64, f_max: f64) -> f64 {
    (1.0 - eta) * total_delay / a + workload * eta.log2() / f_max
}

/// Uplink rate user `k` needs to push one update within [`t_star`].
pub fn required_rate(eta: f64, total_delay: f64, scenario: &Scenario, k: usize) -> Result<f64, OptimizerError> {
    let user = &scenario.users()[k];
    let t = t_star(
        eta,
        total_delay,
        scenario.derived().a,
        scenario.derived().workload[k],
        user.f_max,
    );
    if !(t > 0.0) {
        return Err(OptimizerError::NoTransmitTime { eta, total_delay });
    }
    Ok(scenario.net().upload_bits / t)
}

/// Smallest bandwidth at which `b log2(1 + g p / (n0 b))` reaches `rate`.
///
/// With `m = rate / ceiling`, the equation reduces to `q e^{-mq} = e^{-m}` for
/// `q = 1 + c/b`, whose nontrivial root comes from the lower Lambert branch:
/// `b = -ln2 * rate / (W_{-1}(-m e^{-m}) + m)`. The upper branch only returns
/// the trivial `q = 1`.
pub fn required_bandwidth(rate: f64, gain: f64, p_max: f64, noise_psd: f64) -> Result<f64, OptimizerError> {
    if rate <= 0.0 {
        return Ok(0.0);
    }
    let ceiling = capacity_ceiling(p_max, gain, noise_psd);
    let m = rate / ceiling;
    if !(m < 1.0) {
        return Err(OptimizerError::AboveCapacity { rate, ceiling });
    }
    let w = lambert_w_m1(-m * (-m).exp())?;
    let denom = w + m;
    if !(denom < 0.0) {
        // m so close to 1 that the two branches coincide in floating point.
        return Err(OptimizerError::AboveCapacity { rate, ceiling });
    }
    Ok(-LN_2 * rate / denom)
}

/// Per-user quantities that do not depend on `eta` or `T`.
#[derive(Debug, Clone, Copy)]
struct UserTerms {
    workload: f64,
    f_max: f64,
    gain: f64,
    p_max: f64,
    /// Shortest possible upload time: `s / ceiling`.
    min_transmit: f64,
}

fn user_terms(scenario: &Scenario) -> impl Iterator<Item = UserTerms> + '_ {
    let s = scenario.net().upload_bits;
    let n0 = scenario.net().noise_psd;
    scenario.users_with_workload().map(move |(u, workload)| UserTerms {
        workload,
        f_max: u.f_max,
        gain: u.gain,
        p_max: u.p_max,
        min_transmit: s / capacity_ceiling(u.p_max, u.gain, n0),
    })
}

/// Total bandwidth the users need at accuracy `eta` for deadline `total_delay`.
///
/// Returns `f64::INFINITY` when any user has no transmit time left or would
/// need a rate at or above its capacity ceiling.
pub fn total_required_bandwidth(eta: f64, total_delay: f64, scenario: &Scenario) -> f64 {
    if !(eta > 0.0 && eta < 1.0) {
        return f64::INFINITY;
    }
    let a = scenario.derived().a;
    let s = scenario.net().upload_bits;
    let n0 = scenario.net().noise_psd;
    let mut total = 0.0;
    for u in user_terms(scenario) {
        let t = t_star(eta, total_delay, a, u.workload, u.f_max);
        if !(t > 0.0) {
            return f64::INFINITY;
        }
        match required_bandwidth(s / t, u.gain, u.p_max, n0) {
            Ok(b) => total += b,
            Err(_) => return f64::INFINITY,
        }
    }
    total
}

/// Derivative of [`total_required_bandwidth`] with respect to `eta`.
///
/// Uses `d b / d rate = 1 / z'(b)` with `z(b) = b log2(1 + c/b)`, and
/// `d rate / d eta = -s t*'(eta) / t*(eta)^2`.
pub fn bandwidth_derivative(eta: f64, total_delay: f64, scenario: &Scenario) -> f64 {
    let a = scenario.derived().a;
    let s = scenario.net().upload_bits;
    let n0 = scenario.net().noise_psd;
    let mut total = 0.0;
    for u in user_terms(scenario) {
        let t = t_star(eta, total_delay, a, u.workload, u.f_max);
        let dt = -total_delay / a + u.workload / (u.f_max * eta * LN_2);
        let rate = s / t;
        let b = match required_bandwidth(rate, u.gain, u.p_max, n0) {
            Ok(b) if t > 0.0 => b,
            _ => return f64::NAN,
        };
        let c = u.gain * u.p_max / n0;
        let dz_db = (c / b).ln_1p() / LN_2 - c / ((b + c) * LN_2);
        let drate = -s * dt / (t * t);
        total += drate / dz_db;
    }
    total
}

/// The accuracies at which every user can still meet the deadline.
///
/// Each user's transmit budget `t*(eta)` is concave in `eta` and vanishes at
/// `eta = 1`, so the set where it exceeds the shortest possible upload time is
/// an interval (possibly empty). The intersection over users is returned, with
/// both ends on the admissible side.
pub fn eta_domain(total_delay: f64, scenario: &Scenario, tol: f64) -> Option<Interval> {
    if !(total_delay > 0.0) || !total_delay.is_finite() {
        return None;
    }
    let a = scenario.derived().a;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for u in user_terms(scenario) {
        let (lo_k, hi_k) = user_eta_interval(total_delay, a, &u, tol)?;
        lo = lo.max(lo_k);
        hi = hi.min(hi_k);
        if lo >= hi {
            return None;
        }
    }
    Interval::new(lo, hi).ok()
}

fn user_eta_interval(total_delay: f64, a: f64, u: &UserTerms, tol: f64) -> Option<(f64, f64)> {
    let budget = |eta: f64| t_star(eta, total_delay, a, u.workload, u.f_max);
    let admissible = |eta: f64| budget(eta) > u.min_transmit;
    let peak = u.workload * a / (u.f_max * total_delay * LN_2);
    if !(peak < 1.0) || !admissible(peak) {
        return None;
    }
    let lo = if admissible(f64::MIN_POSITIVE) {
        f64::MIN_POSITIVE
    } else {
        let bracket = Interval::new(f64::MIN_POSITIVE, peak).ok()?;
        bisect_threshold(admissible, bracket, tol).ok()?.value
    };
    // Mirror the right half so the predicate is false-then-true again.
    let bracket = Interval::new(0.0, 1.0 - peak).ok()?;
    let gap = bisect_threshold(|x| admissible(1.0 - x), bracket, tol).ok()?.value;
    Some((lo, 1.0 - gap))
}

/// Minimizer of the total bandwidth demand over the admissible accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaStar {
    pub eta: f64,
    pub bandwidth: f64,
    pub domain: Interval,
}

pub fn solve_eta_star(
    total_delay: f64,
    scenario: &Scenario,
    options: &SolverOptions,
) -> Result<EtaStar, OptimizerError> {
    let domain =
        eta_domain(total_delay, scenario, options.domain_tol).ok_or(OptimizerError::EmptyDomain { total_delay })?;
    let objective = |eta: f64| total_required_bandwidth(eta, total_delay, scenario);
    let eta = match options.inner {
        InnerSearch::GoldenSection => minimize_convex_1d(objective, domain, options.eta_tol)?.x,
        InnerSearch::DerivativeBisection => {
            let slope = |eta: f64| bandwidth_derivative(eta, total_delay, scenario);
            match bisect_root(slope, domain, options.eta_tol) {
                Ok(eta) => eta,
                Err(NumericsError::NoSignChange { f_lo, .. }) if f_lo >= 0.0 => domain.lo,
                Err(NumericsError::NoSignChange { f_hi, .. }) if f_hi <= 0.0 => domain.hi,
                Err(e) => return Err(e.into()),
            }
        }
    };
    let bandwidth = objective(eta);
    if !bandwidth.is_finite() {
        return Err(OptimizerError::EmptyDomain { total_delay });
    }
    Ok(EtaStar { eta, bandwidth, domain })
}

/// Outcome of the feasibility test for one deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub eta_star: Option<f64>,
    /// Minimal total bandwidth over `eta`; infinite when no `eta` is admissible.
    pub required_bandwidth: f64,
    pub eta_domain: Option<Interval>,
}

/// Whether deadline `total_delay` is achievable within the scenario's bandwidth.
pub fn check_feasible(total_delay: f64, scenario: &Scenario, options: &SolverOptions) -> FeasibilityReport {
    match solve_eta_star(total_delay, scenario, options) {
        Ok(star) => FeasibilityReport {
            feasible: star.bandwidth <= scenario.net().bandwidth,
            eta_star: Some(star.eta),
            required_bandwidth: star.bandwidth,
            eta_domain: Some(star.domain),
        },
        Err(_) => FeasibilityReport {
            feasible: false,
            eta_star: None,
            required_bandwidth: f64::INFINITY,
            eta_domain: eta_domain(total_delay, scenario, options.domain_tol),
        },
    }
}

/// Rate user `user` gets on `bandwidth` at full power.
pub(crate) fn full_power_rate(user: &UserProfile, bandwidth: f64, noise_psd: f64) -> f64 {
    achievable_rate(bandwidth, user.p_max, user.gain, noise_psd)
}
