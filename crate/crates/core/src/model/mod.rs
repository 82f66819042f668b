//! Physical and learning parameters of a federated-learning deployment, and the
//! rate/delay formulas built on them.

mod formulas;
mod generate;
mod io;
mod units;

pub use formulas::{
    achievable_rate, capacity_ceiling, global_rounds, local_computation_time, path_loss_db, user_delay,
};
pub use generate::{ScenarioParams, generate_scenario};
pub use units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid value at {pointer}: {message}")]
    InvalidField { pointer: String, message: String },
    #[error("{what} (got {value})")]
    Domain { what: &'static str, value: f64 },
    #[error("malformed scenario JSON at {pointer}: {message}")]
    Json { pointer: String, message: String },
}

fn invalid(pointer: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::InvalidField {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn positive(pointer: &str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(pointer, format!("must be finite and > 0, got {value}")))
    }
}

/// One device: its compute workload, hardware limits and uplink gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    /// CPU cycles to process one sample.
    #[serde(rename = "c_cycles_per_sample")]
    pub cycles_per_sample: f64,
    #[serde(rename = "d_samples")]
    pub samples: u64,
    /// Maximum CPU frequency, cycles/s.
    #[serde(rename = "f_max_hz")]
    pub f_max: f64,
    /// Maximum transmit power, W.
    #[serde(rename = "p_max_w")]
    pub p_max: f64,
    /// Linear power gain to the base station.
    #[serde(rename = "gain_linear")]
    pub gain: f64,
}

impl UserProfile {
    fn validate(&self, index: usize) -> Result<(), ModelError> {
        let at = |field: &str| format!("/users/{index}/{field}");
        positive(&at("c_cycles_per_sample"), self.cycles_per_sample)?;
        if self.samples == 0 {
            return Err(invalid(at("d_samples"), "must be >= 1"));
        }
        positive(&at("f_max_hz"), self.f_max)?;
        positive(&at("p_max_w"), self.p_max)?;
        positive(&at("gain_linear"), self.gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Total uplink bandwidth, Hz.
    #[serde(rename = "bandwidth_hz")]
    pub bandwidth: f64,
    /// Noise power spectral density, W/Hz.
    #[serde(rename = "noise_psd_w_per_hz")]
    pub noise_psd: f64,
    /// Size of one model update, bits.
    pub upload_bits: f64,
}

impl NetworkConfig {
    fn validate(&self) -> Result<(), ModelError> {
        positive("/network/bandwidth_hz", self.bandwidth)?;
        positive("/network/noise_psd_w_per_hz", self.noise_psd)?;
        positive("/network/upload_bits", self.upload_bits)
    }
}

/// Smoothness constants of the loss and the hyperparameters of the
/// federated algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub lipschitz: f64,
    #[serde(rename = "gamma")]
    pub strong_convexity: f64,
    pub xi: f64,
    /// Local gradient step size.
    #[serde(rename = "delta")]
    pub step: f64,
    #[serde(rename = "epsilon0")]
    pub global_accuracy: f64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            lipschitz: 1.0,
            strong_convexity: 1.0,
            xi: 0.1,
            step: 0.1,
            global_accuracy: 1e-3,
        }
    }
}

/// Convergence preconditions that are violated but do not break any formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningWarning {
    /// `xi > gamma / L`: the global iteration bound is no longer guaranteed.
    XiAboveBound { xi: f64, bound: f64 },
    /// `delta >= 2 / L`: local gradient steps may diverge.
    StepTooLarge { step: f64, bound: f64 },
}

impl std::fmt::Display for LearningWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::XiAboveBound { xi, bound } => {
                write!(
                    f,
                    "xi = {xi} exceeds gamma/L = {bound}; global round bound not guaranteed"
                )
            }
            Self::StepTooLarge { step, bound } => {
                write!(
                    f,
                    "step = {step} is not below 2/L = {bound}; local iterations may diverge"
                )
            }
        }
    }
}

impl LearningConfig {
    /// Hard invariants are errors; convergence preconditions come back as warnings.
    pub fn validate(&self) -> Result<Vec<LearningWarning>, ModelError> {
        positive("/learning/lipschitz", self.lipschitz)?;
        positive("/learning/gamma", self.strong_convexity)?;
        if self.strong_convexity > self.lipschitz {
            return Err(invalid("/learning/gamma", "must not exceed lipschitz"));
        }
        positive("/learning/xi", self.xi)?;
        positive("/learning/delta", self.step)?;
        if !(self.global_accuracy > 0.0 && self.global_accuracy < 1.0) {
            return Err(invalid("/learning/epsilon0", "must lie in (0, 1)"));
        }
        let mut warnings = Vec::new();
        let xi_bound = self.strong_convexity / self.lipschitz;
        if self.xi > xi_bound {
            warnings.push(LearningWarning::XiAboveBound {
                xi: self.xi,
                bound: xi_bound,
            });
        }
        let step_bound = 2.0 / self.lipschitz;
        if self.step >= step_bound {
            warnings.push(LearningWarning::StepTooLarge {
                step: self.step,
                bound: step_bound,
            });
        }
        Ok(warnings)
    }

    /// Global-round coefficient `a = 2 L^2 / (gamma^2 xi) * ln(1 / eps0)`.
    pub fn global_coefficient(&self) -> f64 {
        let (l, g) = (self.lipschitz, self.strong_convexity);
        2.0 * l * l / (g * g * self.xi) * (1.0 / self.global_accuracy).ln()
    }

    /// Local-iteration coefficient `v = 2 / ((2 - L delta) delta gamma)`.
    pub fn local_coefficient(&self) -> Result<f64, ModelError> {
        let denom = (2.0 - self.lipschitz * self.step) * self.step * self.strong_convexity;
        if !(denom > 0.0) {
            return Err(ModelError::Domain {
                what: "step must be below 2/L for the local iteration count to exist",
                value: self.step,
            });
        }
        Ok(2.0 / denom)
    }
}

/// Constants the delay model derives from the learning setup.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Global rounds are `a / (1 - eta)`.
    pub a: f64,
    /// Local iterations are `v * log2(1 / eta)`.
    pub v: f64,
    /// Per-user cycles per unit of `log2(1/eta)`: `v * C_k * D_k`.
    pub workload: Vec<f64>,
}

pub fn derive_constants(learn: &LearningConfig, users: &[UserProfile]) -> Result<DerivedConstants, ModelError> {
    learn.validate()?;
    let a = learn.global_coefficient();
    let v = learn.local_coefficient()?;
    let workload = users
        .iter()
        .map(|u| v * u.cycles_per_sample * u.samples as f64)
        .collect();
    Ok(DerivedConstants { a, v, workload })
}

/// Everything the delay solver needs. Derived constants are kept in sync with
/// the inputs by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    users: Vec<UserProfile>,
    net: NetworkConfig,
    learn: LearningConfig,
    derived: DerivedConstants,
    seed: Option<u64>,
}

impl Scenario {
    pub fn new(
        users: Vec<UserProfile>,
        net: NetworkConfig,
        learn: LearningConfig,
        seed: Option<u64>,
    ) -> Result<Self, ModelError> {
        if users.is_empty() {
            return Err(invalid("/users", "at least one user is required"));
        }
        for (i, u) in users.iter().enumerate() {
            u.validate(i)?;
        }
        net.validate()?;
        let derived = derive_constants(&learn, &users)?;
        Ok(Self {
            users,
            net,
            learn,
            derived,
            seed,
        })
    }

    pub fn users(&self) -> &[UserProfile] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn net(&self) -> &NetworkConfig {
        &self.net
    }

    pub fn learn(&self) -> &LearningConfig {
        &self.learn
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Same users and learning setup on a different network.
    pub fn with_network(&self, net: NetworkConfig) -> Result<Self, ModelError> {
        Self::new(self.users.clone(), net, self.learn, self.seed)
    }

    pub fn with_users(&self, users: Vec<UserProfile>) -> Result<Self, ModelError> {
        Self::new(users, self.net, self.learn, self.seed)
    }

    /// Iterate users together with their workload `A_k`.
    pub fn users_with_workload(&self) -> impl Iterator<Item = (&UserProfile, f64)> {
        self.users.iter().zip(self.derived.workload.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(c: f64) -> UserProfile {
        UserProfile {
            cycles_per_sample: c,
            samples: 500,
            f_max: 2e9,
            p_max: 0.01,
            gain: 1e-10,
        }
    }

    fn net() -> NetworkConfig {
        NetworkConfig {
            bandwidth: 20e6,
            noise_psd: dbm_to_watts(-174.0),
            upload_bits: 28.1e3,
        }
    }

    #[test]
    fn unit_constants() {
        let learn = LearningConfig {
            lipschitz: 1.0,
            strong_convexity: 1.0,
            xi: 1.0,
            step: 1.0,
            global_accuracy: (-1.0f64).exp(),
        };
        let d = derive_constants(&learn, &[user(1.0)]).unwrap();
        assert!((d.a - 2.0).abs() < 1e-15);
        assert_eq!(d.v, 2.0);
        assert_eq!(d.workload, vec![1000.0]);
    }

    #[test]
    fn default_learning_constants() {
        let d = derive_constants(&LearningConfig::default(), &[user(2e4)]).unwrap();
        assert!((d.a - 20.0 * 1000f64.ln()).abs() < 1e-12);
        assert!((d.a - 138.155_105_579_642_74).abs() < 1e-9);
        assert!((d.v - 10.526_315_789_473_685).abs() < 1e-12);
        assert!((d.workload[0] - d.v * 2e4 * 500.0).abs() < 1e-3);
    }

    #[test]
    fn oversized_step_is_a_domain_error() {
        let learn = LearningConfig {
            step: 2.0,
            ..LearningConfig::default()
        };
        assert!(matches!(
            derive_constants(&learn, &[user(1.0)]),
            Err(ModelError::Domain { .. })
        ));
    }

    #[test]
    fn precondition_violations_are_warnings() {
        let learn = LearningConfig {
            lipschitz: 4.0,
            strong_convexity: 1.0,
            xi: 0.5,
            step: 0.6,
            global_accuracy: 1e-3,
        };
        let w = learn.validate().unwrap();
        assert_eq!(w.len(), 2);
        assert!(matches!(w[0], LearningWarning::XiAboveBound { .. }));
        assert!(matches!(w[1], LearningWarning::StepTooLarge { .. }));
    }

    #[test]
    fn invalid_learning_values_name_the_field() {
        let learn = LearningConfig {
            strong_convexity: 2.0,
            ..LearningConfig::default()
        };
        match learn.validate().unwrap_err() {
            ModelError::InvalidField { pointer, .. } => assert_eq!(pointer, "/learning/gamma"),
            e => panic!("{e}"),
        }
        let learn = LearningConfig {
            global_accuracy: 1.0,
            ..LearningConfig::default()
        };
        assert!(learn.validate().is_err());
    }

    #[test]
    fn doubling_cycles_doubles_workload() {
        let users: Vec<_> = [1.3e4, 2.2e4, 2.9e4].into_iter().map(user).collect();
        let doubled: Vec<_> = users
            .iter()
            .map(|u| UserProfile {
                cycles_per_sample: 2.0 * u.cycles_per_sample,
                ..*u
            })
            .collect();
        let learn = LearningConfig::default();
        let d1 = derive_constants(&learn, &users).unwrap();
        let d2 = derive_constants(&learn, &doubled).unwrap();
        for (x, y) in d1.workload.iter().zip(&d2.workload) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn scenario_validation_points_at_offending_user() {
        let mut users = vec![user(1e4), user(2e4)];
        users[1].p_max = -1.0;
        match Scenario::new(users, net(), LearningConfig::default(), None).unwrap_err() {
            ModelError::InvalidField { pointer, .. } => assert_eq!(pointer, "/users/1/p_max_w"),
            e => panic!("{e}"),
        }
        assert!(Scenario::new(vec![], net(), LearningConfig::default(), None).is_err());
    }
}
