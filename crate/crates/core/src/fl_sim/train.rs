use std::io::Write;

use rayon::prelude::*;

use super::loss::value_and_gradient;
use super::{Dataset, FlError, Loss, LossKind, UserData, global_loss, surrogate_value_and_gradient};
use crate::model::LearningConfig;

/// Growth of the surrogate over its starting value treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: Loss,
    pub xi: f64,
    /// Local gradient step size `delta`.
    pub step: f64,
    /// Local-iteration coefficient `v`.
    pub v: f64,
    /// Local accuracy `eta`.
    pub eta: f64,
    pub max_rounds: usize,
    /// `F(w*)`, when known. Enables the accuracy ratio column.
    pub optimum: Option<f64>,
    /// Stop once the accuracy ratio reaches this level. Needs `optimum`.
    pub target_accuracy: Option<f64>,
    /// Without a known optimum, stop once the relative loss change drops below this.
    pub rel_change_tol: f64,
    /// Starting weights; zero when unset.
    pub initial_weights: Option<Vec<f64>>,
}

impl TrainConfig {
    /// `xi`, `step` and `v` from a learning setup, with the remaining fields at defaults.
    pub fn from_learning(learn: &LearningConfig, loss: Loss, eta: f64) -> Result<Self, FlError> {
        let v = learn.local_coefficient().map_err(|e| FlError::Config(e.to_string()))?;
        Ok(Self {
            loss,
            xi: learn.xi,
            step: learn.step,
            v,
            eta,
            max_rounds: 500,
            optimum: None,
            target_accuracy: None,
            rel_change_tol: 1e-9,
            initial_weights: None,
        })
    }

    fn validate(&self, dim: usize) -> Result<(), FlError> {
        let bad = |msg: String| Err(FlError::Config(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            return bad(format!("v must be positive, got {}", self.v));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return bad(format!("xi must be >= 0, got {}", self.xi));
        }
        if !(self.loss.ridge >= 0.0 && self.loss.ridge.is_finite()) {
            return bad(format!("ridge must be >= 0, got {}", self.loss.ridge));
        }
        if !(self.rel_change_tol >= 0.0) {
            return bad(format!("rel_change_tol must be >= 0, got {}", self.rel_change_tol));
        }
        if self.target_accuracy.is_some() && self.optimum.is_none() {
            return bad("a target accuracy needs a known optimum".into());
        }
        if let Some(w) = &self.initial_weights {
            if w.len() != dim {
                return bad(format!(
                    "initial weights have length {}, data has dimension {dim}",
                    w.len()
                ));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return bad("initial weights must be finite".into());
            }
        }
        Ok(())
    }
}

/// `ceil(v log2(1/eta))`, the whole number of local steps per round.
pub fn local_iterations(v: f64, eta: f64) -> Result<usize, FlError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(FlError::Config(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(FlError::Config(format!("v must be positive, got {v}")));
    }
    // The small offset keeps exact products such as 2 * log2(2) from rounding up.
    Ok((v * (1.0 / eta).log2() - 1e-12).ceil().max(0.0) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolve {
    pub h: Vec<f64>,
    pub iterations: usize,
    /// Surrogate value before each step and after the last one.
    pub surrogate: Vec<f64>,
}

/// Gradient descent on the user's surrogate from `h = 0`.
pub fn local_solve(
    w_global: &[f64],
    grad_global: &[f64],
    user: &UserData,
    config: &TrainConfig,
) -> Result<LocalSolve, FlError> {
    let iterations = local_iterations(config.v, config.eta)?;
    let loss = &config.loss;
    let (_, grad_local) = value_and_gradient(w_global, user, loss);
    let surrogate =
        |h: &[f64]| surrogate_value_and_gradient(w_global, h, &grad_local, grad_global, config.xi, user, loss);

    let mut h = vec![0.0; w_global.len()];
    let (mut value, mut grad) = surrogate(&h);
    let limit = value + DIVERGENCE_FACTOR * value.abs().max(1e-12);
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(value);
    for i in 0..iterations {
        for (hj, gj) in h.iter_mut().zip(&grad) {
            *hj -= config.step * gj;
        }
        let (next, next_grad) = surrogate(&h);
        if !next.is_finite() || next > limit {
            return Err(FlError::Divergence {
                iteration: i + 1,
                before: value,
                after: next,
            });
        }
        value = next;
        grad = next_grad;
        trace.push(value);
    }
    Ok(LocalSolve {
        h,
        iterations,
        surrogate: trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub global_loss: f64,
    pub accuracy_ratio: Option<f64>,
    pub local_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    /// Round 0 holds the initial loss; one more entry per completed round.
    pub records: Vec<RoundRecord>,
    /// The accuracy target or the relative-change rule stopped the run.
    pub converged: bool,
    pub weights: Vec<f64>,
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.global_loss).collect()
    }

    /// First round whose accuracy ratio is at most `accuracy`.
    pub fn rounds_to_accuracy(&self, accuracy: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.accuracy_ratio.is_some_and(|a| a <= accuracy))
            .map(|r| r.round)
    }

    /// Rounds where the loss rose by more than `slack` (absolute).
    pub fn increases(&self, slack: f64) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].global_loss > w[0].global_loss + slack)
            .map(|w| w[1].round)
            .collect()
    }

    /// Columns `round, global_loss, accuracy_ratio, local_iters`; the ratio is
    /// empty when the optimum is unknown.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FlError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["round", "global_loss", "accuracy_ratio", "local_iters"])?;
        for r in &self.records {
            w.write_record([
                r.round.to_string(),
                r.global_loss.to_string(),
                r.accuracy_ratio.map(|a| a.to_string()).unwrap_or_default(),
                r.local_iters.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn accuracy_ratio(loss: f64, initial: f64, optimum: Option<f64>) -> Option<f64> {
    let opt = optimum?;
    let gap0 = initial - opt;
    Some(if gap0 > 0.0 {
        ((loss - opt) / gap0).max(0.0)
    } else {
        0.0
    })
}

/// Sum of per-user vectors in user order, divided by the user count.
fn uniform_mean(parts: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for p in parts {
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
    }
    let k = parts.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    acc
}

/// Rounds of gradient exchange, parallel local solves and uniform aggregation.
/// Per-user work runs on rayon; sums are formed in user order so the result
/// does not depend on scheduling.
pub fn federated_train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainLog, FlError> {
    let dim = dataset.dim();
    config.validate(dim)?;
    let iters = local_iterations(config.v, config.eta)?;
    let loss = &config.loss;
    let mut w = config.initial_weights.clone().unwrap_or_else(|| vec![0.0; dim]);

    let initial = global_loss(&w, dataset, loss);
    let mut records = vec![RoundRecord {
        round: 0,
        global_loss: initial,
        accuracy_ratio: accuracy_ratio(initial, initial, config.optimum),
        local_iters: 0,
    }];
    let mut converged = false;
    let mut prev = initial;
    for round in 1..=config.max_rounds {
        let grads: Vec<Vec<f64>> = dataset
            .users()
            .par_iter()
            .map(|u| value_and_gradient(&w, u, loss).1)
            .collect();
        let grad_global = uniform_mean(&grads, dim);
        let steps: Vec<Vec<f64>> = dataset
            .users()
            .par_iter()
            .map(|u| local_solve(&w, &grad_global, u, config).map(|s| s.h))
            .collect::<Result<_, _>>()?;
        let update = uniform_mean(&steps, dim);
        for (wi, ui) in w.iter_mut().zip(&update) {
            *wi += ui;
        }

        let current = global_loss(&w, dataset, loss);
        if !current.is_finite() {
            return Err(FlError::Divergence {
                iteration: round,
                before: prev,
                after: current,
            });
        }
        let ratio = accuracy_ratio(current, initial, config.optimum);
        records.push(RoundRecord {
            round,
            global_loss: current,
            accuracy_ratio: ratio,
            local_iters: iters,
        });
        let done = match (config.optimum, config.target_accuracy) {
            (Some(_), Some(target)) => ratio.is_some_and(|r| r <= target),
            (Some(_), None) => false,
            (None, _) => (prev - current).abs() <= config.rel_change_tol * prev.abs(),
        };
        prev = current;
        if done {
            converged = true;
            break;
        }
    }
    if loss.kind == LossKind::NonconvexReluSquared {
        let log = TrainLog {
            records,
            converged,
            weights: w,
        };
        let ups = log.increases(1e-12 * initial.abs());
        if !ups.is_empty() {
            log::warn!(
                "nonconvex loss rose in {} rounds (first at round {})",
                ups.len(),
                ups[0]
            );
        }
        return Ok(log);
    }
    Ok(TrainLog {
        records,
        converged,
        weights: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl_sim::{SynthSpec, estimate_smoothness, synth_dataset};

    fn scalar_user() -> UserData {
        // F(w) = 1/2 w^2
        UserData::new(vec![1.0], vec![0.0], 1).unwrap()
    }

    fn config(xi: f64, step: f64, v: f64, eta: f64) -> TrainConfig {
        TrainConfig {
            loss: Loss::convex(),
            xi,
            step,
            v,
            eta,
            max_rounds: 1,
            optimum: None,
            target_accuracy: None,
            rel_change_tol: 0.0,
            initial_weights: None,
        }
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(local_iterations(2.0, 0.5).unwrap(), 2);
        assert_eq!(local_iterations(2.0, 0.25).unwrap(), 4);
        assert_eq!(local_iterations(1.5, 0.5).unwrap(), 2);
        assert!(local_iterations(1.0, 1.0).is_err());
        assert!(local_iterations(1.0, 0.0).is_err());
    }

    #[test]
    fn one_step_reaches_scalar_surrogate_minimizer() {
        let u = scalar_user();
        let w = 2.0;
        let cfg = config(0.1, 1.0, 1.0, 0.5);
        let s = local_solve(&[w], &[w], &u, &cfg).unwrap();
        assert_eq!(s.iterations, 1);
        assert!((s.h[0] + 0.1 * w).abs() < 1e-15);
    }

    #[test]
    fn local_solve_descends_surrogate() {
        let ds = synth_dataset(&SynthSpec::default()).unwrap();
        let w = vec![0.3; ds.dim()];
        let grad = crate::fl_sim::global_gradient(&w, &ds, &Loss::convex());
        let cfg = config(0.25, 1.0, 8.0, 0.1);
        for u in ds.users() {
            let s = local_solve(&w, &grad, u, &cfg).unwrap();
            assert_eq!(s.surrogate.len(), s.iterations + 1);
            for pair in s.surrogate.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-15 * pair[0].abs());
            }
        }
    }

    #[test]
    fn oversized_step_is_reported_as_divergence() {
        let u = UserData::new(vec![10.0], vec![0.0], 1).unwrap();
        let cfg = config(0.1, 1.0, 40.0, 0.5);
        let err = local_solve(&[1.0], &[100.0], &u, &cfg).unwrap_err();
        assert!(matches!(err, FlError::Divergence { .. }), "{err}");
    }

    #[test]
    fn scalar_round_shrinks_weight_by_xi() {
        let ds = Dataset::new(vec![scalar_user()], Some(0.0)).unwrap();
        let cfg = TrainConfig {
            initial_weights: Some(vec![1.0]),
            ..config(0.1, 1.0, 3.0, 0.5)
        };
        let log = federated_train(&ds, &cfg).unwrap();
        assert!((log.weights[0] - 0.9).abs() < 1e-15);
        assert_eq!(log.records.len(), 2);
        assert!((log.records[1].global_loss - 0.405).abs() < 1e-15);
    }

    #[test]
    fn zero_rounds_logs_initial_loss_only() {
        let ds = synth_dataset(&SynthSpec::default()).unwrap();
        let cfg = TrainConfig {
            max_rounds: 0,
            optimum: ds.known_optimum(),
            ..config(0.25, 1.0, 8.0, 0.5)
        };
        let log = federated_train(&ds, &cfg).unwrap();
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.records[0].accuracy_ratio, Some(1.0));
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("round,global_loss,accuracy_ratio,local_iters\n0,"));
    }

    #[test]
    fn single_user_exact_solve_is_monotone() {
        let ds = synth_dataset(&SynthSpec {
            users: 1,
            ..SynthSpec::default()
        })
        .unwrap();
        let cfg = TrainConfig {
            max_rounds: 30,
            ..config(1.0, 1.0, 8.0, 1e-6)
        };
        let log = federated_train(&ds, &cfg).unwrap();
        assert!(log.increases(0.0).is_empty());
        assert!(log.records.last().unwrap().global_loss < 1e-6 * log.records[0].global_loss);
    }

    #[test]
    fn identical_users_follow_single_user_trajectory() {
        let one = synth_dataset(&SynthSpec {
            users: 1,
            ..SynthSpec::default()
        })
        .unwrap();
        let u = one.users()[0].clone();
        let cfg = TrainConfig {
            max_rounds: 20,
            ..config(0.25, 1.0, 8.0, 0.5)
        };
        let base = federated_train(&one, &cfg).unwrap();
        let two = Dataset::new(vec![u.clone(), u.clone()], None).unwrap();
        assert_eq!(federated_train(&two, &cfg).unwrap(), base);
        let three = Dataset::new(vec![u.clone(), u.clone(), u], None).unwrap();
        let log3 = federated_train(&three, &cfg).unwrap();
        for (a, b) in log3.records.iter().zip(&base.records) {
            assert!((a.global_loss - b.global_loss).abs() <= 1e-12 * b.global_loss.max(1e-300));
        }
    }

    #[test]
    fn parallel_schedule_does_not_change_result() {
        let ds = synth_dataset(&SynthSpec {
            users: 8,
            ..SynthSpec::default()
        })
        .unwrap();
        let cfg = TrainConfig {
            max_rounds: 10,
            ..config(0.25, 1.0, 8.0, 0.5)
        };
        let a = federated_train(&ds, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| federated_train(&ds, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn round_bound_holds_on_synthetic_data() {
        let ds = synth_dataset(&SynthSpec {
            condition_number: 3.0,
            ..SynthSpec::default()
        })
        .unwrap();
        let s = estimate_smoothness(&ds, &Loss::convex()).unwrap();
        let learn = LearningConfig {
            lipschitz: s.lipschitz,
            strong_convexity: s.strong_convexity,
            xi: s.strong_convexity / s.lipschitz,
            step: 1.0 / s.lipschitz,
            global_accuracy: 1e-2,
        };
        let eta = 0.5;
        let bound = (learn.global_coefficient() / (1.0 - eta)).ceil() as usize;
        let cfg = TrainConfig {
            max_rounds: bound,
            optimum: ds.known_optimum(),
            target_accuracy: Some(1e-2),
            ..TrainConfig::from_learning(&learn, Loss::convex(), eta).unwrap()
        };
        let log = federated_train(&ds, &cfg).unwrap();
        assert!(log.converged);
        assert!(log.rounds_to_accuracy(1e-2).unwrap() <= bound);
    }

    #[test]
    fn rejects_bad_config() {
        let ds = Dataset::new(vec![scalar_user()], None).unwrap();
        for cfg in [
            config(0.1, 1.0, 1.0, 1.0),
            config(0.1, 0.0, 1.0, 0.5),
            config(-0.1, 1.0, 1.0, 0.5),
            TrainConfig {
                initial_weights: Some(vec![0.0, 0.0]),
                ..config(0.1, 1.0, 1.0, 0.5)
            },
            TrainConfig {
                target_accuracy: Some(0.1),
                ..config(0.1, 1.0, 1.0, 0.5)
            },
        ] {
            assert!(matches!(federated_train(&ds, &cfg), Err(FlError::Config(_))));
        }
    }
}
