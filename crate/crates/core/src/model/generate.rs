use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    LearningConfig, ModelError, NetworkConfig, Scenario, UserProfile, db_to_linear, dbm_to_watts, path_loss_db,
};

/// Knobs of the random deployment. `Default` is the reference setup: a
/// 500 m square cell with the base station at the centre, 20 MHz, 10 dBm,
/// 2 GHz devices, 500 samples each.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub area_side_m: f64,
    pub shadowing_std_db: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub cycles_per_sample: (f64, f64),
    pub samples: u64,
    pub f_max_hz: f64,
    pub p_max_dbm: f64,
    pub upload_bits: f64,
    pub bandwidth_hz: f64,
    pub learning: LearningConfig,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            area_side_m: 500.0,
            shadowing_std_db: 8.0,
            noise_psd_dbm_per_hz: -174.0,
            cycles_per_sample: (1e4, 3e4),
            samples: 500,
            f_max_hz: 2e9,
            p_max_dbm: 10.0,
            upload_bits: 28.1e3,
            bandwidth_hz: 20e6,
            learning: LearningConfig::default(),
        }
    }
}

/// Users closer than this to the base station are placed at this distance.
const MIN_DISTANCE_M: f64 = 1.0;

/// Draw a deployment of `users` devices. The seed fixes every draw.
pub fn generate_scenario(seed: u64, users: usize, params: &ScenarioParams) -> Result<Scenario, ModelError> {
    if users == 0 {
        return Err(ModelError::InvalidField {
            pointer: "/users".into(),
            message: "at least one user is required".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shadowing = Normal::new(0.0, params.shadowing_std_db).map_err(|e| ModelError::InvalidField {
        pointer: "shadowing_std_db".into(),
        message: e.to_string(),
    })?;
    let (c_lo, c_hi) = params.cycles_per_sample;
    if !(c_lo > 0.0 && c_lo <= c_hi) {
        return Err(ModelError::InvalidField {
            pointer: "cycles_per_sample".into(),
            message: format!("need 0 < lo <= hi, got ({c_lo}, {c_hi})"),
        });
    }
    let half = 0.5 * params.area_side_m;
    let p_max = dbm_to_watts(params.p_max_dbm);

    let profiles = (0..users)
        .map(|_| {
            let x = rng.gen_range(-half..=half);
            let y = rng.gen_range(-half..=half);
            let distance_km = x.hypot(y).max(MIN_DISTANCE_M) / 1000.0;
            let loss_db = path_loss_db(distance_km, shadowing.sample(&mut rng));
            let cycles = if c_lo == c_hi { c_lo } else { rng.gen_range(c_lo..c_hi) };
            UserProfile {
                cycles_per_sample: cycles,
                samples: params.samples,
                f_max: params.f_max_hz,
                p_max,
                gain: db_to_linear(-loss_db),
            }
        })
        .collect();

    let net = NetworkConfig {
        bandwidth: params.bandwidth_hz,
        noise_psd: dbm_to_watts(params.noise_psd_dbm_per_hz),
        upload_bits: params.upload_bits,
    };
    Scenario::new(profiles, net, params.learning, Some(seed))
}
