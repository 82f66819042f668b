use super::inner::{check_feasible, full_power_rate, required_bandwidth, t_star};
use super::{Allocation, OptimizerError, Scheme, SolverInfo, SolverOptions};
use crate::model::{Scenario, local_computation_time, user_delay};
use crate::numerics::{Interval, Threshold, bisect_threshold};

/// Deadline that is always achievable: every user at full CPU and power,
/// an equal share `B/K` of the band, and `eta = 1/2`.
pub fn t_upper_bound(scenario: &Scenario) -> f64 {
    let a = scenario.derived().a;
    let share = scenario.net().bandwidth / scenario.num_users() as f64;
    let n0 = scenario.net().noise_psd;
    let s = scenario.net().upload_bits;
    scenario
        .users_with_workload()
        .map(|(u, workload)| 2.0 * a * (workload / u.f_max + s / full_power_rate(u, share, n0)))
        .fold(0.0, f64::max)
}

/// Bisection bracket for the deadline, `(0, T_max]`. `T_max` is feasible in
/// exact arithmetic; the upper end is nudged up if rounding says otherwise.
pub(crate) fn deadline_bracket<P: FnMut(f64) -> bool>(
    scenario: &Scenario,
    mut feasible: P,
) -> Result<Interval, OptimizerError> {
    let t_max = t_upper_bound(scenario);
    for scale in [1.0, 1.0 + 1e-9, 1.0 + 1e-6] {
        if feasible(t_max * scale) {
            return Ok(Interval::new(0.0, t_max * scale)?);
        }
    }
    Err(OptimizerError::Infeasible(format!(
        "the equal-share witness deadline {t_max} s failed the feasibility check"
    )))
}

/// Build an FDMA allocation at full CPU and power in which every user gets
/// exactly the bandwidth its deadline requires.
pub(crate) fn tight_fdma_allocation(
    scheme: Scheme,
    scenario: &Scenario,
    total_delay: f64,
    eta: f64,
    solver: SolverInfo,
) -> Result<Allocation, OptimizerError> {
    let a = scenario.derived().a;
    let s = scenario.net().upload_bits;
    let n0 = scenario.net().noise_psd;
    let k = scenario.num_users();
    let mut alloc = Allocation {
        scheme,
        total_delay,
        eta,
        transmit_time: Vec::with_capacity(k),
        bandwidth: Vec::with_capacity(k),
        cpu: Vec::with_capacity(k),
        power: Vec::with_capacity(k),
        per_user_delay: Vec::with_capacity(k),
        approximate_baseline: false,
        solver,
    };
    for (u, workload) in scenario.users_with_workload() {
        let t = t_star(eta, total_delay, a, workload, u.f_max);
        if !(t > 0.0) {
            return Err(OptimizerError::NoTransmitTime { eta, total_delay });
        }
        let b = required_bandwidth(s / t, u.gain, u.p_max, n0)?;
        let tau = local_computation_time(workload, u.f_max, eta)?;
        alloc.transmit_time.push(t);
        alloc.bandwidth.push(b);
        alloc.cpu.push(u.f_max);
        alloc.power.push(u.p_max);
        alloc.per_user_delay.push(user_delay(a, eta, tau, t)?);
    }
    Ok(alloc)
}

pub(crate) fn info_from(threshold: &Threshold, eta_domain: Option<Interval>) -> SolverInfo {
    SolverInfo {
        outer_iterations: threshold.iterations,
        bracket_width: threshold.bracket_width(),
        eta_domain,
    }
}

/// Minimal training delay: bisection on the deadline with the bandwidth
/// feasibility test as the predicate, then the allocation at the optimum.
pub fn minimize_delay(scenario: &Scenario, options: &SolverOptions) -> Result<Allocation, OptimizerError> {
    let feasible = |t: f64| check_feasible(t, scenario, options).feasible;
    let bracket = deadline_bracket(scenario, feasible)?;
    let threshold = bisect_threshold(feasible, bracket, options.rel_tol)?;
    let report = check_feasible(threshold.value, scenario, options);
    let eta = report
        .eta_star
        .filter(|_| report.feasible)
        .ok_or_else(|| OptimizerError::Infeasible(format!("deadline {} s lost feasibility", threshold.value)))?;
    tight_fdma_allocation(
        Scheme::Proposed,
        scenario,
        threshold.value,
        eta,
        info_from(&threshold, report.eta_domain),
    )
}

/// Run `scheme` on `scenario`.
pub fn solve(scenario: &Scenario, scheme: Scheme, options: &SolverOptions) -> Result<Allocation, OptimizerError> {
    match scheme {
        Scheme::Proposed => minimize_delay(scenario, options),
        Scheme::EbFdma => super::baseline_eb_fdma(scenario, options),
        Scheme::FeFdma => super::baseline_fe_fdma(scenario, options),
        Scheme::Tdma => super::baseline_tdma(scenario, options),
    }
}
