//! Reference schemes the proposed allocation is compared against.

use super::delay::{deadline_bracket, info_from, tight_fdma_allocation};
use super::inner::{full_power_rate, total_required_bandwidth};
use super::{Allocation, OptimizerError, Scheme, SolverInfo, SolverOptions};
use crate::model::{Scenario, global_rounds, local_computation_time, user_delay};
use crate::numerics::{Interval, bisect_threshold, minimize_convex_1d};

/// Accuracy search range for the baselines that optimize `eta` directly.
const ETA_RANGE: (f64, f64) = (1e-12, 1.0 - 1e-12);

fn eta_range() -> Interval {
    Interval::new(ETA_RANGE.0, ETA_RANGE.1).expect("constant range is valid")
}

fn upload_times(scenario: &Scenario, bandwidth: f64) -> Vec<f64> {
    let s = scenario.net().upload_bits;
    let n0 = scenario.net().noise_psd;
    scenario
        .users()
        .iter()
        .map(|u| s / full_power_rate(u, bandwidth, n0))
        .collect()
}

/// Equal bandwidth `B/K` for everyone; only `eta` is optimized.
pub fn baseline_eb_fdma(scenario: &Scenario, options: &SolverOptions) -> Result<Allocation, OptimizerError> {
    let a = scenario.derived().a;
    let share = scenario.net().bandwidth / scenario.num_users() as f64;
    let uploads = upload_times(scenario, share);
    let delay_at = |eta: f64| {
        scenario
            .users_with_workload()
            .zip(&uploads)
            .map(|((u, workload), &t)| a / (1.0 - eta) * (workload * -eta.log2() / u.f_max + t))
            .fold(0.0, f64::max)
    };
    let best = minimize_convex_1d(delay_at, eta_range(), options.eta_tol)?;
    let eta = best.x;

    let k = scenario.num_users();
    let mut per_user_delay = Vec::with_capacity(k);
    for ((u, workload), &t) in scenario.users_with_workload().zip(&uploads) {
        let tau = local_computation_time(workload, u.f_max, eta)?;
        per_user_delay.push(user_delay(a, eta, tau, t)?);
    }
    Ok(Allocation {
        scheme: Scheme::EbFdma,
        total_delay: per_user_delay.iter().copied().fold(0.0, f64::max),
        eta,
        transmit_time: uploads,
        bandwidth: vec![share; k],
        cpu: scenario.users().iter().map(|u| u.f_max).collect(),
        power: scenario.users().iter().map(|u| u.p_max).collect(),
        per_user_delay,
        approximate_baseline: false,
        solver: SolverInfo::default(),
    })
}

/// Fixed local accuracy `eta = 1/2`; bandwidth split and deadline optimized.
pub fn baseline_fe_fdma(scenario: &Scenario, options: &SolverOptions) -> Result<Allocation, OptimizerError> {
    const ETA: f64 = 0.5;
    let band = scenario.net().bandwidth;
    let feasible = |t: f64| total_required_bandwidth(ETA, t, scenario) <= band;
    let bracket = deadline_bracket(scenario, feasible)?;
    let threshold = bisect_threshold(feasible, bracket, options.rel_tol)?;
    tight_fdma_allocation(
        Scheme::FeFdma,
        scenario,
        threshold.value,
        ETA,
        info_from(&threshold, None),
    )
}

/// Time-division uplink: after every user finishes its local iterations, users
/// upload one after another, each over the full band at full power.
///
/// This approximates the TDMA reference scheme; only `eta` is optimized and
/// the result is flagged with `approximate_baseline`.
pub fn baseline_tdma(scenario: &Scenario, options: &SolverOptions) -> Result<Allocation, OptimizerError> {
    let a = scenario.derived().a;
    let band = scenario.net().bandwidth;
    let slots = upload_times(scenario, band);
    let airtime: f64 = slots.iter().sum();
    let slowest_compute = |eta: f64| {
        scenario
            .users_with_workload()
            .map(|(u, workload)| workload * -eta.log2() / u.f_max)
            .fold(0.0, f64::max)
    };
    let round_delay = |eta: f64| a / (1.0 - eta) * (slowest_compute(eta) + airtime);
    let best = minimize_convex_1d(round_delay, eta_range(), options.eta_tol)?;
    let eta = best.x;

    let rounds = global_rounds(a, eta)?;
    let compute = slowest_compute(eta);
    let mut finished = 0.0;
    let per_user_delay = slots
        .iter()
        .map(|t| {
            finished += t;
            rounds * (compute + finished)
        })
        .collect::<Vec<_>>();
    let k = scenario.num_users();
    Ok(Allocation {
        scheme: Scheme::Tdma,
        total_delay: per_user_delay.last().copied().unwrap_or(0.0),
        eta,
        transmit_time: slots,
        bandwidth: vec![band; k],
        cpu: scenario.users().iter().map(|u| u.f_max).collect(),
        power: scenario.users().iter().map(|u| u.p_max).collect(),
        per_user_delay,
        approximate_baseline: true,
        solver: SolverInfo::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{ScenarioParams, generate_scenario};
    use crate::optimizer::minimize_delay;

    fn tight() -> SolverOptions {
        SolverOptions::default().with_rel_tol(1e-9)
    }

    #[test]
    fn single_user_baselines_coincide_with_proposed() {
        let base = fixtures::toy_two_user();
        let s = base.with_users(vec![base.users()[0]]).unwrap();
        let opts = tight();
        let p = minimize_delay(&s, &opts).unwrap().total_delay;
        let eb = baseline_eb_fdma(&s, &opts).unwrap().total_delay;
        let td = baseline_tdma(&s, &opts).unwrap().total_delay;
        assert!((eb / p - 1.0).abs() < 1e-7, "{eb} vs {p}");
        assert!((td / p - 1.0).abs() < 1e-7, "{td} vs {p}");
    }

    #[test]
    fn baselines_are_dominated() {
        let opts = tight();
        for seed in 0..5 {
            let s = generate_scenario(seed, 30, &ScenarioParams::default()).unwrap();
            let p = minimize_delay(&s, &opts).unwrap();
            for alloc in [
                baseline_eb_fdma(&s, &opts).unwrap(),
                baseline_fe_fdma(&s, &opts).unwrap(),
            ] {
                alloc.validate(&s).unwrap();
                assert!(
                    p.total_delay <= alloc.total_delay * (1.0 + 1e-6),
                    "{} vs {:?}",
                    p.total_delay,
                    alloc.scheme
                );
            }
        }
    }

    #[test]
    fn fixed_accuracy_coincides_when_optimum_is_one_half() {
        // A single user with the optimum pinned near 1/2 is hard to build exactly,
        // so check the equivalent statement: FE-FDMA equals the proposed scheme
        // restricted to eta = 1/2 via the deadline at which eta = 1/2 is tight.
        let s = fixtures::toy_two_user();
        let fe = baseline_fe_fdma(&s, &tight()).unwrap();
        assert_eq!(fe.eta, 0.5);
        let used: f64 = fe.bandwidth.iter().sum();
        assert!((used / s.net().bandwidth - 1.0).abs() < 1e-6);
        assert!(total_required_bandwidth(0.5, fe.total_delay * (1.0 - 1e-6), &s) > s.net().bandwidth);
    }

    #[test]
    fn eb_fdma_eta_matches_grid() {
        let s = generate_scenario(3, 25, &ScenarioParams::default()).unwrap();
        let eb = baseline_eb_fdma(&s, &tight()).unwrap();
        let a = s.derived().a;
        let best = (1..100_000)
            .map(|i| i as f64 / 100_000.0)
            .map(|eta| {
                s.users_with_workload()
                    .zip(&eb.transmit_time)
                    .map(|((u, w), &t)| a / (1.0 - eta) * (w * -eta.log2() / u.f_max + t))
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(eb.total_delay <= best * (1.0 + 1e-9));
        assert!(eb.total_delay >= best * (1.0 - 1e-4));
    }

    #[test]
    fn tdma_airtime_grows_linearly_for_identical_users() {
        let base = fixtures::toy_two_user();
        let u = base.users()[0];
        let opts = tight();
        let air = |k: usize| -> f64 {
            let s = base.with_users(vec![u; k]).unwrap();
            baseline_tdma(&s, &opts).unwrap().transmit_time.iter().sum()
        };
        let (a1, a3, a6) = (air(1), air(3), air(6));
        assert!((a3 / a1 - 3.0).abs() < 1e-12 && (a6 / a1 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tdma_is_flagged_and_valid() {
        let s = generate_scenario(1, 20, &ScenarioParams::default()).unwrap();
        let t = baseline_tdma(&s, &tight()).unwrap();
        assert!(t.approximate_baseline);
        t.validate(&s).unwrap();
        assert_eq!(t.total_delay, *t.per_user_delay.last().unwrap());
    }

    #[test]
    fn default_scenario_regression_values() {
        // First trusted run on generate_scenario(0, 50, defaults), pinned.
        let s = generate_scenario(0, 50, &ScenarioParams::default()).unwrap();
        let opts = tight();
        let got = [
            minimize_delay(&s, &opts).unwrap().total_delay,
            baseline_eb_fdma(&s, &opts).unwrap().total_delay,
            baseline_fe_fdma(&s, &opts).unwrap().total_delay,
            baseline_tdma(&s, &opts).unwrap().total_delay,
        ];
        let pinned = REGRESSION;
        for (g, p) in got.iter().zip(pinned) {
            assert!((g / p - 1.0).abs() < 1e-6, "{got:?}");
        }
    }

    const REGRESSION: [f64; 4] = [
        20.413_031_342_902_784,
        25.289_238_384_240_107,
        21.870_008_906_819_77,
        37.582_557_602_815_235,
    ];
}
