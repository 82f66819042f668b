use std::f64::consts::LN_2;

use super::ModelError;

/// Shannon rate `b * log2(1 + g p / (n0 b))` of an FDMA sub-band, in bits/s.
///
/// A zero-width band carries nothing (the continuous limit as `b -> 0`).
pub fn achievable_rate(bandwidth: f64, power: f64, gain: f64, noise_psd: f64) -> f64 {
    if bandwidth <= 0.0 || power <= 0.0 {
        return 0.0;
    }
    let snr = gain * power / (noise_psd * bandwidth);
    bandwidth * snr.ln_1p() / LN_2
}

/// Supremum of [`achievable_rate`] over bandwidth: `g p / (n0 ln 2)`.
pub fn capacity_ceiling(power: f64, gain: f64, noise_psd: f64) -> f64 {
    gain * power / (noise_psd * LN_2)
}

/// Time for the local iterations of one global round: `A log2(1/eta) / f`.
pub fn local_computation_time(workload: f64, cpu_hz: f64, eta: f64) -> Result<f64, ModelError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(ModelError::Domain {
            what: "local accuracy must lie in (0, 1]",
            value: eta,
        });
    }
    if !(cpu_hz > 0.0) {
        return Err(ModelError::Domain {
            what: "cpu frequency must be positive",
            value: cpu_hz,
        });
    }
    Ok((workload * -eta.log2() / cpu_hz).max(0.0))
}

/// Number of global rounds `a / (1 - eta)`, kept continuous.
pub fn global_rounds(a: f64, eta: f64) -> Result<f64, ModelError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(ModelError::Domain {
            what: "local accuracy must lie in (0, 1)",
            value: eta,
        });
    }
    Ok(a / (1.0 - eta))
}

/// Training delay of one user: rounds times per-round compute plus upload time.
pub fn user_delay(a: f64, eta: f64, compute_time: f64, transmit_time: f64) -> Result<f64, ModelError> {
    Ok(global_rounds(a, eta)? * (compute_time + transmit_time))
}

/// Large-scale gain from the 128.1 + 37.6 log10(d[km]) path-loss law plus a
/// shadowing term in dB.
pub fn path_loss_db(distance_km: f64, shadowing_db: f64) -> f64 {
    128.1 + 37.6 * distance_km.log10() + shadowing_db
}
