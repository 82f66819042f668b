//! Parameter sweeps: mean delay of each scheme over seeded scenario draws.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{ModelError, ScenarioParams, generate_scenario};
use crate::optimizer::{Scheme, SolverOptions, solve};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    PMaxDbm,
    BandwidthHz,
    /// Number of users.
    Users,
    UploadBits,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::PMaxDbm => "p_max_dbm",
            SweepParameter::BandwidthHz => "bandwidth_hz",
            SweepParameter::Users => "K",
            SweepParameter::UploadBits => "upload_bits",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParameter::PMaxDbm,
            SweepParameter::BandwidthHz,
            SweepParameter::Users,
            SweepParameter::UploadBits,
        ]
        .into_iter()
        .find(|p| p.label() == s)
        .ok_or_else(|| format!("unknown sweep parameter `{s}` (expected p_max_dbm, bandwidth_hz, K or upload_bits)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Scenario draws per value; draw `i` uses seed `base_seed + i`.
    pub draws: usize,
    pub base_seed: u64,
    /// User count when the sweep is not over `K`.
    pub users: usize,
    /// Settings the swept parameter is applied on top of.
    pub base: ScenarioParams,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>, draws: usize, base_seed: u64) -> Self {
        Self {
            parameter,
            values,
            draws,
            base_seed,
            users: 50,
            base: ScenarioParams::default(),
        }
    }

    fn validate(&self) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Invalid("value list is empty".into()));
        }
        if self.draws == 0 {
            return Err(SweepError::Invalid("draws must be at least 1".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(SweepError::Invalid(format!("value {v} is not finite")));
        }
        if self.parameter == SweepParameter::Users
            && let Some(v) = self.values.iter().find(|v| !(**v >= 1.0 && v.fract() == 0.0))
        {
            return Err(SweepError::Invalid(format!("K must be a positive integer, got {v}")));
        }
        if self.base_seed.checked_add(self.draws as u64 - 1).is_none() {
            return Err(SweepError::Invalid("base seed plus draws overflows".into()));
        }
        Ok(())
    }

    /// Scenario settings and user count for one swept value.
    pub fn params_for(&self, value: f64) -> (ScenarioParams, usize) {
        let mut params = self.base.clone();
        let mut users = self.users;
        match self.parameter {
            SweepParameter::PMaxDbm => params.p_max_dbm = value,
            SweepParameter::BandwidthHz => params.bandwidth_hz = value,
            SweepParameter::Users => users = value as usize,
            SweepParameter::UploadBits => params.upload_bits = value,
        }
        (params, users)
    }
}

/// Aggregate over the draws of one (value, scheme) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter_value: f64,
    pub scheme: Scheme,
    /// Mean and sample standard deviation over the successful draws.
    pub mean_delay_s: f64,
    pub std_delay_s: f64,
    /// Successful draws.
    pub draws: usize,
    pub failed_draws: usize,
    /// Message of the first failed draw, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, value: f64, scheme: Scheme) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.parameter_value == value && r.scheme == scheme)
    }

    /// Columns `parameter_value, scheme, mean_delay_s, std_delay_s, draws,
    /// failed_draws, error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "parameter_value",
            "scheme",
            "mean_delay_s",
            "std_delay_s",
            "draws",
            "failed_draws",
            "error",
        ])?;
        let num = |x: f64| if x.is_finite() { x.to_string() } else { String::new() };
        for r in &self.rows {
            w.write_record([
                r.parameter_value.to_string(),
                r.scheme.label().to_string(),
                num(r.mean_delay_s),
                num(r.std_delay_s),
                r.draws.to_string(),
                r.failed_draws.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Solve every scheme on every draw of every value. Draws run in parallel;
/// results are gathered in (value, draw) order, so the output does not depend
/// on scheduling. Failed draws are counted, never fatal.
pub fn run_sweep(spec: &SweepSpec, schemes: &[Scheme], options: &SolverOptions) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    if schemes.is_empty() {
        return Err(SweepError::Invalid("no schemes selected".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.draws as u64).map(move |d| (v, d)))
        .collect();
    let outcomes: Vec<Vec<Result<f64, String>>> = jobs
        .par_iter()
        .map(|&(vi, draw)| {
            let (params, users) = spec.params_for(spec.values[vi]);
            match generate_scenario(spec.base_seed + draw, users, &params) {
                Ok(scenario) => schemes
                    .iter()
                    .map(|&s| {
                        solve(&scenario, s, options)
                            .map(|a| a.total_delay)
                            .map_err(|e| e.to_string())
                    })
                    .collect(),
                Err(e) => vec![Err(e.to_string()); schemes.len()],
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(spec.values.len() * schemes.len());
    for (vi, &value) in spec.values.iter().enumerate() {
        let cell = &outcomes[vi * spec.draws..(vi + 1) * spec.draws];
        for (si, &scheme) in schemes.iter().enumerate() {
            let mut ok = Vec::with_capacity(spec.draws);
            let mut failed = 0;
            let mut error = None;
            for draw in cell {
                match &draw[si] {
                    Ok(t) => ok.push(*t),
                    Err(e) => {
                        failed += 1;
                        error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let (mean, std) = mean_std(&ok);
            rows.push(SweepRow {
                parameter_value: value,
                scheme,
                mean_delay_s: mean,
                std_delay_s: std,
                draws: ok.len(),
                failed_draws: failed,
                error,
            });
        }
    }
    Ok(SweepResult {
        parameter: spec.parameter,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::minimize_delay;

    #[test]
    fn parameter_names_round_trip() {
        for p in ["p_max_dbm", "bandwidth_hz", "K", "upload_bits"] {
            assert_eq!(p.parse::<SweepParameter>().unwrap().label(), p);
        }
        assert!("k".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn single_draw_matches_direct_solve() {
        let mut spec = SweepSpec::new(SweepParameter::PMaxDbm, vec![10.0], 1, 7);
        spec.users = 5;
        let opts = SolverOptions::default();
        let res = run_sweep(&spec, &[Scheme::Proposed], &opts).unwrap();
        assert_eq!(res.rows.len(), 1);
        let direct = minimize_delay(&generate_scenario(7, 5, &ScenarioParams::default()).unwrap(), &opts).unwrap();
        let row = &res.rows[0];
        assert_eq!(row.mean_delay_s, direct.total_delay);
        assert_eq!((row.std_delay_s, row.draws, row.failed_draws), (0.0, 1, 0));
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let mut spec = SweepSpec::new(SweepParameter::Users, vec![2.0, 4.0], 3, 0);
        spec.users = 0;
        let opts = SolverOptions::default();
        let a = run_sweep(&spec, &Scheme::ALL, &opts).unwrap();
        let b = run_sweep(&spec, &Scheme::ALL, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 8);
        assert_eq!((a.rows[0].parameter_value, a.rows[0].scheme), (2.0, Scheme::Proposed));
        assert_eq!((a.rows[7].parameter_value, a.rows[7].scheme), (4.0, Scheme::Tdma));
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(
            text.starts_with("parameter_value,scheme,mean_delay_s,std_delay_s,draws,failed_draws,error\n2,proposed,")
        );
    }

    #[test]
    fn failed_draws_are_recorded() {
        // A negative band cannot be generated; the error lands in the row.
        let mut spec = SweepSpec::new(SweepParameter::BandwidthHz, vec![-1.0, 1e6], 2, 0);
        spec.users = 3;
        let res = run_sweep(&spec, &[Scheme::Proposed], &SolverOptions::default()).unwrap();
        let bad = &res.rows[0];
        assert_eq!((bad.draws, bad.failed_draws), (0, 2));
        assert!(bad.error.is_some() && bad.mean_delay_s.is_nan());
        assert_eq!(res.rows[1].failed_draws, 0);
    }

    #[test]
    fn rejects_bad_specs() {
        let opts = SolverOptions::default();
        let s = |p, v: Vec<f64>, d| SweepSpec::new(p, v, d, 0);
        assert!(run_sweep(&s(SweepParameter::PMaxDbm, vec![], 1), &[Scheme::Proposed], &opts).is_err());
        assert!(run_sweep(&s(SweepParameter::PMaxDbm, vec![1.0], 0), &[Scheme::Proposed], &opts).is_err());
        assert!(run_sweep(&s(SweepParameter::Users, vec![2.5], 1), &[Scheme::Proposed], &opts).is_err());
        assert!(run_sweep(&s(SweepParameter::PMaxDbm, vec![1.0], 1), &[], &opts).is_err());
    }
}
