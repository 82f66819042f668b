//! Small hand-built scenarios with round-number constants, shared by tests,
//! the verification suite and the benches.

use crate::model::{LearningConfig, NetworkConfig, Scenario, UserProfile};

/// `a = 10` and `v = 2`: L = gamma = 1, xi = 0.2, delta = 1, eps0 = 1/e.
pub fn round_learning() -> LearningConfig {
    LearningConfig {
        lipschitz: 1.0,
        strong_convexity: 1.0,
        xi: 0.2,
        step: 1.0,
        global_accuracy: (-1.0f64).exp(),
    }
}

const NOISE_PSD: f64 = 1e-20;

/// A unit-power user whose per-round compute at `eta = 1/2` takes
/// `seconds_per_halving` seconds and whose `g p / n0` equals `snr_bandwidth` Hz.
pub fn round_user(seconds_per_halving: f64, snr_bandwidth: f64) -> UserProfile {
    let f_max = 1e9;
    UserProfile {
        // A = v C D with v = 2 and D = 1.
        cycles_per_sample: seconds_per_halving * f_max / 2.0,
        samples: 1,
        f_max,
        p_max: 1.0,
        gain: snr_bandwidth * NOISE_PSD,
    }
}

/// Two users, `a = 10`, `A/f = {1, 2}` s, `s = 1e5` bits,
/// `g p / n0 = {1e6, 3e5}` Hz, `B = 5 kHz`.
pub fn toy_two_user() -> Scenario {
    Scenario::new(
        vec![round_user(1.0, 1e6), round_user(2.0, 3e5)],
        NetworkConfig {
            bandwidth: 5e3,
            noise_psd: NOISE_PSD,
            upload_bits: 1e5,
        },
        round_learning(),
        None,
    )
    .expect("fixture is valid")
}

/// One user with `a = 10`, `A/f = 1` s, `s = 1e6` bits, `B = 1 MHz`.
pub fn unit_scenario(snr_bandwidth: f64) -> Scenario {
    Scenario::new(
        vec![round_user(1.0, snr_bandwidth)],
        NetworkConfig {
            bandwidth: 1e6,
            noise_psd: NOISE_PSD,
            upload_bits: 1e6,
        },
        round_learning(),
        None,
    )
    .expect("fixture is valid")
}
