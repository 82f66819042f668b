//! Inputs shared by the criterion benches.

use fedlat_core::model::{Scenario, ScenarioParams, generate_scenario};

/// Default-parameter deployment with `users` users, fixed seed.
pub fn default_scenario(users: usize) -> Scenario {
    generate_scenario(42, users, &ScenarioParams::default()).expect("default parameters are valid")
}
