//! The acceptance suite, shared by `fedlat verify` and the integration tests.
//!
//! Every check returns a [`CriterionResult`] instead of panicking so callers
//! can print a full report. A check passes only if its condition holds and it
//! finished within its time budget.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fl_sim::{
    Dataset, Loss, SynthSpec, TrainConfig, UserData, estimate_smoothness, federated_train, global_gradient,
    global_loss, local_gradient, local_loss, surrogate_value_and_gradient, synth_dataset,
};
use crate::model::{
    LearningConfig, Scenario, ScenarioParams, achievable_rate, capacity_ceiling, dbm_to_watts, generate_scenario,
    user_delay,
};
use crate::numerics::lambert_w_m1;
use crate::optimizer::{
    Scheme, SolverOptions, bandwidth_derivative, check_feasible, eta_domain, minimize_delay, required_bandwidth, solve,
    t_star, total_required_bandwidth,
};
use crate::sweep::{SweepParameter, SweepSpec, run_sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Numerics, round trips, convexity and gradients.
    Fast,
    /// Everything, including the grid oracles and the training runs.
    Full,
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level `{s}` (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub budget_s: Option<f64>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = self.budget_s.map(|b| format!(" / {b:.0}s")).unwrap_or_default();
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2}s{budget})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_s
        )
    }
}

pub const ALL: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
pub const FAST: [u8; 4] = [1, 2, 3, 11];

pub fn criteria(level: Level) -> &'static [u8] {
    match level {
        Level::Fast => &FAST,
        Level::Full => &ALL,
    }
}

pub fn run_level(level: Level) -> Vec<CriterionResult> {
    criteria(level).iter().map(|&id| run(id).expect("known id")).collect()
}

/// Run one criterion by number; `None` for an unknown number.
pub fn run(id: u8) -> Option<CriterionResult> {
    let (name, budget, check): (&'static str, Option<u64>, fn() -> Outcome) = match id {
        1 => ("lambert W round trip", Some(1), lambert_round_trip),
        2 => ("rate inversion round trip", Some(1), rate_inversion_round_trip),
        3 => ("inner objective convexity", Some(30), inner_convexity),
        4 => ("feasibility oracle equivalence", Some(120), feasibility_oracle),
        5 => ("end-to-end optimality vs grid", Some(60), end_to_end_grid),
        6 => ("dominance over baselines", Some(120), dominance),
        7 => ("delay decreases with transmit power", Some(120), power_trend),
        8 => ("outer bisection termination", None, termination),
        9 => ("round bound on synthetic data", Some(30), round_bound),
        10 => ("loss trajectories", Some(60), trajectories),
        11 => ("gradients vs finite differences", Some(10), gradients),
        _ => return None,
    };
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
    let mut detail = outcome.detail;
    if outcome.passed && !in_time {
        detail.push_str("; over time budget");
    }
    Some(CriterionResult {
        id,
        name,
        passed: outcome.passed && in_time,
        detail,
        elapsed_s: elapsed.as_secs_f64(),
        budget_s: budget.map(|b| b as f64),
    })
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn fail(detail: String) -> Outcome {
    Outcome::new(false, detail)
}

fn lambert_round_trip() -> Outcome {
    let n = 100_000;
    let mut worst = 0.0f64;
    let mut worst_w = 0.0;
    for i in 0..n {
        let w = -50.0 + 49.0 * i as f64 / (n - 1) as f64;
        let got = match lambert_w_m1(w * w.exp()) {
            Ok(v) => v,
            Err(e) => return fail(format!("w = {w}: {e}")),
        };
        let err = (got - w).abs() / w.abs();
        if err > worst {
            worst = err;
            worst_w = w;
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("{n} points, worst relative error {worst:.2e} at w = {worst_w:.6}"),
    )
}

fn rate_inversion_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n0 = dbm_to_watts(-174.0);
    let mut worst = 0.0f64;
    let n = 10_000;
    for _ in 0..n {
        let gain = 10f64.powf(rng.gen_range(-16.0..-9.0));
        let power = 10f64.powf(rng.gen_range(-3.0..0.0));
        let ceiling = capacity_ceiling(power, gain, n0);
        let rate = ceiling * 10f64.powf(rng.gen_range(-6.0..0.999f64.log10()));
        let b = match required_bandwidth(rate, gain, power, n0) {
            Ok(b) => b,
            Err(e) => return fail(format!("rate {rate}: {e}")),
        };
        worst = worst.max((achievable_rate(b, power, gain, n0) - rate).abs() / rate);
    }
    Outcome::new(worst <= 1e-9, format!("{n} samples, worst relative error {worst:.2e}"))
}

/// Default-parameter scenario with `users` users.
fn default_scenario(seed: u64, users: usize) -> Scenario {
    generate_scenario(seed, users, &ScenarioParams::default()).expect("default parameters are valid")
}

fn inner_convexity() -> Outcome {
    let opts = SolverOptions::default();
    let results: Vec<Result<(f64, usize), String>> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let sc = default_scenario(1000 + seed, 10);
            let t_opt = minimize_delay(&sc, &opts).map_err(|e| e.to_string())?.total_delay;
            let mut worst = 0.0f64;
            let mut grids = 0;
            for factor in [1.001, 1.05, 1.25, 1.5, 2.0] {
                let t = t_opt * factor;
                let dom = eta_domain(t, &sc, opts.domain_tol).ok_or(format!("seed {seed}: empty domain at {t}"))?;
                let f: Vec<f64> = dom
                    .interior_grid(1000)
                    .map(|e| total_required_bandwidth(e, t, &sc))
                    .collect();
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(format!("seed {seed}: non-finite demand inside the domain at T = {t}"));
                }
                for w in f.windows(3) {
                    let scale = w[0].abs() + 2.0 * w[1].abs() + w[2].abs();
                    let second = w[0] - 2.0 * w[1] + w[2];
                    worst = worst.min(second / scale);
                }
                grids += 1;
            }
            Ok((worst, grids))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut grids = 0;
    for r in results {
        match r {
            Ok((w, g)) => {
                worst = worst.min(w);
                grids += g;
            }
            Err(e) => return fail(e),
        }
    }
    Outcome::new(
        worst >= -1e-6,
        format!("{grids} grids of 1000 points, most negative scaled second difference {worst:.2e}"),
    )
}

/// Exhaustive grid feasibility: some grid accuracy at which each user's
/// smallest sufficient grid bandwidth adds up to no more than the band.
fn grid_feasible(sc: &Scenario, t: f64, eta_grid: &[f64], bw_steps: usize) -> bool {
    let a = sc.derived().a;
    let net = sc.net();
    let step = net.bandwidth / bw_steps as f64;
    eta_grid.iter().any(|&eta| {
        let mut used = 0usize;
        for (u, workload) in sc.users_with_workload() {
            let budget = t_star(eta, t, a, workload, u.f_max);
            if !(budget > 0.0) {
                return false;
            }
            // Rate grows with bandwidth, so the first sufficient grid point is
            // found by bisection over grid indices.
            let enough =
                |j: usize| achievable_rate(j as f64 * step, u.p_max, u.gain, net.noise_psd) * budget >= net.upload_bits;
            if !enough(bw_steps) {
                return false;
            }
            let (mut lo, mut hi) = (0usize, bw_steps);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if enough(mid) { hi = mid } else { lo = mid }
            }
            used += hi;
            if used > bw_steps {
                return false;
            }
        }
        true
    })
}

fn feasibility_oracle() -> Outcome {
    let opts = SolverOptions::default().with_rel_tol(1e-9);
    let eta_grid: Vec<f64> = (0..4000).map(|i| (i as f64 + 0.5) / 4000.0).collect();
    // Per scenario: rungs checked, rungs skipped, disagreements.
    type Tally = (usize, usize, Vec<String>);
    let results: Vec<Result<Tally, String>> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let sc = default_scenario(2000 + seed, 3);
            let t_opt = minimize_delay(&sc, &opts).map_err(|e| e.to_string())?.total_delay;
            let (mut checked, mut skipped, mut bad) = (0, 0, Vec::new());
            for i in 0..50 {
                let t = t_opt * 0.5 * 4f64.powf(i as f64 / 49.0);
                if (t / t_opt - 1.0).abs() < 0.01 {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let fast = check_feasible(t, &sc, &opts).feasible;
                let grid = grid_feasible(&sc, t, &eta_grid, 4000);
                if fast != grid {
                    bad.push(format!(
                        "seed {seed}, T = {t:.6} (T*/T = {:.4}): solver {fast}, grid {grid}",
                        t_opt / t
                    ));
                }
            }
            Ok((checked, skipped, bad))
        })
        .collect();
    let (mut checked, mut skipped, mut bad) = (0, 0, Vec::new());
    for r in results {
        match r {
            Ok((c, s, b)) => {
                checked += c;
                skipped += s;
                bad.extend(b);
            }
            Err(e) => return fail(e),
        }
    }
    let mut detail = format!(
        "{checked} rungs agree out of {}, {skipped} near-threshold rungs skipped",
        checked
    );
    if !bad.is_empty() {
        detail = format!("{} disagreements, first: {}", bad.len(), bad[0]);
    }
    Outcome::new(bad.is_empty(), detail)
}

/// Smallest `max_k T_k` over a grid of accuracies and two-user band splits.
fn grid_min_delay(sc: &Scenario, n_eta: usize, n_split: usize) -> f64 {
    let a = sc.derived().a;
    let net = sc.net();
    let users: Vec<_> = sc.users_with_workload().collect();
    (0..n_eta)
        .into_par_iter()
        .map(|i| {
            let eta = (i as f64 + 0.5) / n_eta as f64;
            let mut best = f64::INFINITY;
            for j in 1..n_split {
                let share = [j as f64 / n_split as f64, 1.0 - j as f64 / n_split as f64];
                let mut worst = 0.0f64;
                for ((u, workload), frac) in users.iter().zip(share) {
                    let rate = achievable_rate(frac * net.bandwidth, u.p_max, u.gain, net.noise_psd);
                    let compute = workload * (1.0 / eta).log2() / u.f_max;
                    let delay = user_delay(a, eta, compute, net.upload_bits / rate).unwrap_or(f64::INFINITY);
                    worst = worst.max(delay);
                }
                best = best.min(worst);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn end_to_end_grid() -> Outcome {
    let opts = SolverOptions::default().with_rel_tol(1e-9);
    let mut worst_gap = 0.0f64;
    let mut lines = Vec::new();
    for seed in 0..5u64 {
        // A narrow band makes the split matter.
        let params = ScenarioParams {
            bandwidth_hz: 1e5,
            ..ScenarioParams::default()
        };
        let sc = generate_scenario(3000 + seed, 2, &params).expect("valid parameters");
        let t_opt = match minimize_delay(&sc, &opts) {
            Ok(a) => a.total_delay,
            Err(e) => return fail(format!("seed {seed}: {e}")),
        };
        let grid = grid_min_delay(&sc, 1000, 1000);
        let gap = (t_opt - grid).abs() / grid;
        worst_gap = worst_gap.max(gap);
        if t_opt > grid * (1.0 + 1e-9) {
            lines.push(format!("seed {seed}: solver {t_opt} above grid {grid}"));
        }
    }
    let passed = worst_gap <= 0.02 && lines.is_empty();
    let mut detail = format!("5 scenarios, worst relative gap to grid {worst_gap:.2e}");
    if let Some(l) = lines.first() {
        detail.push_str(&format!("; {l}"));
    }
    Outcome::new(passed, detail)
}

fn dominance() -> Outcome {
    let opts = SolverOptions::default().with_rel_tol(1e-9);
    let results: Vec<Result<[f64; 4], String>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let sc = default_scenario(seed, 50);
            let mut out = [0.0; 4];
            for (slot, scheme) in out.iter_mut().zip(Scheme::ALL) {
                *slot = solve(&sc, scheme, &opts)
                    .map_err(|e| format!("seed {seed}, {scheme}: {e}"))?
                    .total_delay;
            }
            Ok(out)
        })
        .collect();
    let mut sums = [0.0; 4];
    let mut violations = Vec::new();
    for (seed, r) in results.into_iter().enumerate() {
        let d = match r {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        if d[0] > d[1] * (1.0 + 1e-6) || d[0] > d[2] * (1.0 + 1e-6) {
            violations.push(format!("seed {seed}: proposed {} eb {} fe {}", d[0], d[1], d[2]));
        }
        for (s, x) in sums.iter_mut().zip(d) {
            *s += x / 100.0;
        }
    }
    let passed = violations.is_empty() && sums[0] < sums[3];
    let mut detail = format!(
        "100 scenarios, mean delay proposed {:.4} eb-fdma {:.4} fe-fdma {:.4} tdma {:.4} s (proposed {:.1}% below tdma)",
        sums[0],
        sums[1],
        sums[2],
        sums[3],
        100.0 * (1.0 - sums[0] / sums[3])
    );
    if let Some(v) = violations.first() {
        detail.push_str(&format!("; {} violations, first {v}", violations.len()));
    }
    Outcome::new(passed, detail)
}

fn power_trend() -> Outcome {
    let spec = SweepSpec::new(SweepParameter::PMaxDbm, vec![0.0, 5.0, 10.0, 15.0, 20.0], 50, 0);
    let res = match run_sweep(&spec, &[Scheme::Proposed], &SolverOptions::default()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let means: Vec<f64> = res.rows.iter().map(|r| r.mean_delay_s).collect();
    let failed: usize = res.rows.iter().map(|r| r.failed_draws).sum();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let listed: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
    Outcome::new(
        decreasing && failed == 0,
        format!(
            "mean delay over 0..20 dBm: [{}] s, {failed} failed draws",
            listed.join(", ")
        ),
    )
}

fn termination() -> Outcome {
    let opts = SolverOptions::default().with_rel_tol(1e-3);
    let mut scenarios: Vec<(String, Scenario)> = vec![("toy".into(), crate::fixtures::toy_two_user())];
    for (seed, k) in (0..30u64).zip([1usize, 2, 3, 5, 10, 20, 50].into_iter().cycle()) {
        scenarios.push((format!("seed {seed}, K = {k}"), default_scenario(4000 + seed, k)));
    }
    let results: Vec<Result<(usize, f64), String>> = scenarios
        .par_iter()
        .map(|(label, sc)| {
            let a = minimize_delay(sc, &opts).map_err(|e| format!("{label}: {e}"))?;
            Ok((a.solver.outer_iterations, a.solver.bracket_width / a.total_delay))
        })
        .collect();
    let (mut max_iter, mut max_width) = (0, 0.0f64);
    for r in results {
        match r {
            Ok((it, w)) => {
                max_iter = max_iter.max(it);
                max_width = max_width.max(w);
            }
            Err(e) => return fail(e),
        }
    }
    Outcome::new(
        max_iter <= 60 && max_width <= 1e-3,
        format!(
            "{} scenarios, at most {max_iter} iterations, widest final bracket {max_width:.2e} relative",
            scenarios.len()
        ),
    )
}

/// Learning setup with the exact curvature of `ds`, `xi = gamma / L`.
fn exact_learning(ds: &Dataset, step_scale: f64, eps0: f64) -> Result<LearningConfig, String> {
    let s = estimate_smoothness(ds, &Loss::convex()).map_err(|e| e.to_string())?;
    Ok(LearningConfig {
        lipschitz: s.lipschitz,
        strong_convexity: s.strong_convexity,
        xi: s.strong_convexity / s.lipschitz,
        step: step_scale / s.lipschitz,
        global_accuracy: eps0,
    })
}

fn round_bound() -> Outcome {
    let eta = 0.5;
    let eps0 = 1e-2;
    let mut lines = Vec::new();
    let mut passed = true;
    for cond in [2.0, 4.0, 8.0] {
        let spec = SynthSpec {
            seed: 9,
            users: 5,
            dim: 10,
            samples: 40,
            condition_number: cond,
            noise: 0.0,
        };
        let outcome = (|| -> Result<(usize, Option<usize>), String> {
            let ds = synth_dataset(&spec).map_err(|e| e.to_string())?;
            let learn = exact_learning(&ds, 1.0, eps0)?;
            let bound = (learn.global_coefficient() / (1.0 - eta)).ceil() as usize;
            let cfg = TrainConfig {
                max_rounds: bound,
                optimum: ds.known_optimum(),
                target_accuracy: Some(eps0),
                ..TrainConfig::from_learning(&learn, Loss::convex(), eta).map_err(|e| e.to_string())?
            };
            let log = federated_train(&ds, &cfg).map_err(|e| e.to_string())?;
            Ok((bound, log.rounds_to_accuracy(eps0)))
        })();
        match outcome {
            Ok((bound, Some(n))) => lines.push(format!("L/gamma = {cond}: {n} rounds (bound {bound})")),
            Ok((bound, None)) => {
                passed = false;
                lines.push(format!("L/gamma = {cond}: not reached within bound {bound}"));
            }
            Err(e) => return fail(e),
        }
    }
    Outcome::new(passed, lines.join("; "))
}

fn trajectories() -> Outcome {
    let spec = SynthSpec {
        seed: 11,
        users: 5,
        dim: 10,
        samples: 100,
        condition_number: 10.0,
        noise: 0.1,
    };
    let run = || -> Result<String, String> {
        let ds = synth_dataset(&spec).map_err(|e| e.to_string())?;
        let learn = LearningConfig {
            xi: 0.1,
            step: 0.1,
            ..exact_learning(&ds, 1.0, 1e-3)?
        };
        let base = TrainConfig {
            max_rounds: 500,
            optimum: ds.known_optimum(),
            ..TrainConfig::from_learning(&learn, Loss::convex(), 0.5).map_err(|e| e.to_string())?
        };
        let convex = federated_train(&ds, &base).map_err(|e| e.to_string())?;
        let f0 = convex.records[0].global_loss;
        let ups = convex.increases(1e-12 * f0);
        if convex.records.len() != 501 {
            return Err(format!("convex run logged {} rounds", convex.records.len() - 1));
        }
        if !ups.is_empty() {
            return Err(format!("convex loss rose at rounds {ups:?}"));
        }
        let nonconvex_cfg = TrainConfig {
            loss: Loss::nonconvex(),
            optimum: None,
            rel_change_tol: 0.0,
            initial_weights: Some(vec![1e-3; ds.dim()]),
            ..base.clone()
        };
        let nonconvex = federated_train(&ds, &nonconvex_cfg).map_err(|e| e.to_string())?;
        if nonconvex.records.iter().any(|r| !r.global_loss.is_finite()) {
            return Err("nonconvex loss is not finite".into());
        }
        let soft = nonconvex.increases(1e-12 * nonconvex.records[0].global_loss);
        Ok(format!(
            "convex: 500 rounds, loss {:.3e} -> {:.3e} (ratio {:.1e}), no increases; nonconvex: loss {:.3e} -> {:.3e}, {} soft-check increases",
            f0,
            convex.records[500].global_loss,
            convex.records[500].accuracy_ratio.unwrap_or(f64::NAN),
            nonconvex.records[0].global_loss,
            nonconvex.records.last().unwrap().global_loss,
            soft.len()
        ))
    };
    match run() {
        Ok(d) => Outcome::new(true, d),
        Err(e) => fail(e),
    }
}

fn rel_err(an: &[f64], fd: &[f64]) -> f64 {
    let diff = an.iter().zip(fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = fd.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_user(rng: &mut ChaCha8Rng, n: usize, d: usize) -> UserData {
    let x = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    UserData::new(x, y, d).expect("well-formed")
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = 6;
    let mut worst = [0.0f64; 4];
    for probe in 0..100 {
        let loss = match probe % 3 {
            0 => Loss::convex(),
            1 => Loss::convex().with_ridge(0.05),
            _ => Loss::nonconvex(),
        };
        let users: Vec<UserData> = (0..3).map(|_| random_user(&mut rng, 25, d)).collect();
        let ds = Dataset::new(users, None).expect("consistent users");
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let u = &ds.users()[0];

        let an = local_gradient(&w, u, &loss);
        worst[0] = worst[0].max(rel_err(&an, &central_diff(|p| local_loss(p, u, &loss), &w)));

        // Equal sample counts, so the uniform gradient average is the gradient of F.
        let gg = global_gradient(&w, &ds, &loss);
        worst[1] = worst[1].max(rel_err(&gg, &central_diff(|p| global_loss(p, &ds, &loss), &w)));

        let xi = rng.gen_range(0.0..1.0);
        let (_, sg) = surrogate_value_and_gradient(&w, &h, &an, &gg, xi, u, &loss);
        let fd = central_diff(|p| surrogate_value_and_gradient(&w, p, &an, &gg, xi, u, &loss).0, &h);
        worst[2] = worst[2].max(rel_err(&sg, &fd));
    }

    let opts = SolverOptions::default();
    let mut probes = 0;
    for seed in 0..100u64 {
        let sc = default_scenario(5000 + seed, 1 + (seed as usize % 5));
        let t_opt = match minimize_delay(&sc, &opts) {
            Ok(a) => a.total_delay,
            Err(e) => return fail(format!("seed {seed}: {e}")),
        };
        let t = t_opt * rng.gen_range(1.05..3.0);
        let Some(dom) = eta_domain(t, &sc, opts.domain_tol) else {
            return fail(format!("seed {seed}: empty domain above the optimum"));
        };
        let eta = dom.lo + dom.width() * rng.gen_range(0.1..0.9);
        let h = 1e-6 * dom.width();
        let fd = (total_required_bandwidth(eta + h, t, &sc) - total_required_bandwidth(eta - h, t, &sc)) / (2.0 * h);
        let an = bandwidth_derivative(eta, t, &sc);
        worst[3] = worst[3].max(rel_err(&[an], &[fd]));
        probes += 1;
    }
    Outcome::new(
        worst.iter().all(|&e| e <= 1e-6),
        format!(
            "100 probes each; worst relative error local {:.1e}, global {:.1e}, surrogate {:.1e}, bandwidth-in-eta {:.1e} ({probes} probes)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_parse() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("medium".parse::<Level>().is_err());
        assert!(run(12).is_none());
        assert_eq!(criteria(Level::Full).len(), 11);
    }
}
