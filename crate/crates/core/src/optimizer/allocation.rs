use std::fmt;

use serde::{Deserialize, Serialize};

use super::OptimizerError;
use crate::model::{Scenario, achievable_rate, local_computation_time, user_delay};
use crate::numerics::Interval;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Proposed,
    EbFdma,
    FeFdma,
    Tdma,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::EbFdma, Scheme::FeFdma, Scheme::Tdma];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::EbFdma => "eb-fdma",
            Scheme::FeFdma => "fe-fdma",
            Scheme::Tdma => "tdma",
        }
    }

    /// Users share the band by frequency rather than by time.
    pub fn is_fdma(self) -> bool {
        !matches!(self, Scheme::Tdma)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected proposed, eb-fdma, fe-fdma or tdma)"))
    }
}

/// Bookkeeping from the search that produced an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverInfo {
    /// Outer bisection steps on the deadline (0 for schemes that do not bisect).
    pub outer_iterations: usize,
    /// Final width of the deadline bracket, seconds.
    pub bracket_width: f64,
    pub eta_domain: Option<Interval>,
}

/// A complete resource allocation. All quantities are SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub scheme: Scheme,
    pub total_delay: f64,
    pub eta: f64,
    pub transmit_time: Vec<f64>,
    pub bandwidth: Vec<f64>,
    pub cpu: Vec<f64>,
    pub power: Vec<f64>,
    pub per_user_delay: Vec<f64>,
    /// The scheme's internals are an approximation of the reference baseline.
    pub approximate_baseline: bool,
    pub solver: SolverInfo,
}

impl Allocation {
    /// Check every constraint of the delay problem against `scenario`.
    ///
    /// TDMA allocations give each user the whole band for its slot, so the
    /// bandwidth check is per user rather than on the sum.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), OptimizerError> {
        let fail = |msg: String| Err(OptimizerError::Invariant(msg));
        let k = scenario.num_users();
        for (name, len) in [
            ("transmit_time", self.transmit_time.len()),
            ("bandwidth", self.bandwidth.len()),
            ("cpu", self.cpu.len()),
            ("power", self.power.len()),
            ("per_user_delay", self.per_user_delay.len()),
        ] {
            if len != k {
                return fail(format!("{name} has {len} entries for {k} users"));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return fail(format!("eta = {} outside (0, 1)", self.eta));
        }
        if !(self.total_delay.is_finite() && self.total_delay > 0.0) {
            return fail(format!("total delay {} is not a positive number", self.total_delay));
        }
        let band = scenario.net().bandwidth;
        if self.scheme.is_fdma() {
            let used: f64 = self.bandwidth.iter().sum();
            if used > band * (1.0 + SLACK) {
                return fail(format!("bandwidth sum {used} exceeds {band}"));
            }
        } else if let Some(b) = self.bandwidth.iter().find(|&&b| b > band * (1.0 + SLACK)) {
            return fail(format!("slot bandwidth {b} exceeds {band}"));
        }

        let a = scenario.derived().a;
        let n0 = scenario.net().noise_psd;
        let s = scenario.net().upload_bits;
        for (i, (user, workload)) in scenario.users_with_workload().enumerate() {
            let (t, b, f, p) = (self.transmit_time[i], self.bandwidth[i], self.cpu[i], self.power[i]);
            if !(t >= 0.0 && b >= 0.0) {
                return fail(format!("user {i}: negative transmit time or bandwidth"));
            }
            if !(f > 0.0 && f <= user.f_max) {
                return fail(format!("user {i}: cpu {f} outside (0, {}]", user.f_max));
            }
            if !(p >= 0.0 && p <= user.p_max) {
                return fail(format!("user {i}: power {p} outside [0, {}]", user.p_max));
            }
            let delivered = t * achievable_rate(b, p, user.gain, n0);
            if delivered < s * (1.0 - SLACK) {
                return fail(format!("user {i}: uploads {delivered} of {s} bits"));
            }
            let ti = self.per_user_delay[i];
            if ti > self.total_delay * (1.0 + SLACK) {
                return fail(format!("user {i}: delay {ti} exceeds total {}", self.total_delay));
            }
            if self.scheme.is_fdma() {
                let tau = local_computation_time(workload, f, self.eta)?;
                let own = user_delay(a, self.eta, tau, t)?;
                if (own - ti).abs() > SLACK * own.max(ti) {
                    return fail(format!("user {i}: recorded delay {ti} but constraints give {own}"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("allocation is always serializable")
    }
}
