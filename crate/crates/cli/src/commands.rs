use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, anyhow};
use fedlat_core::fl_sim::{
    CsvPartition, Dataset, FlError, Loss, SynthSpec, TrainConfig, estimate_smoothness, federated_train, load_csv,
    synth_dataset,
};
use fedlat_core::model::{Scenario, ScenarioParams, generate_scenario};
use fedlat_core::optimizer::{OptimizerError, Scheme, SolverOptions, solve};
use fedlat_core::sweep::{SweepParameter, SweepSpec, run_sweep};
use fedlat_core::verify::{self, Level};

use crate::args::{
    Command, GenArgs, LevelArg, LossArg, OptimizeArgs, ScenarioOverrides, SweepArgs, SweepParam, TrainArgs, VerifyArgs,
};

pub const USAGE: u8 = 1;
pub const INVALID_INPUT: u8 = 2;
pub const INFEASIBLE: u8 = 3;
pub const INVARIANT: u8 = 4;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

trait Tag<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn failure(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen_cmd(a),
        Command::Optimize(a) => optimize(a),
        Command::Sweep(a) => sweep(a),
        Command::Train(a) => train(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

/// Write to `path`, or stdout when `None`.
fn write_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> Result<(), Failure> {
    let result = match path {
        Some(p) => (|| {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().with_context(|| format!("cannot write {}", p.display()))
        })(),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).and_then(|_| lock.flush().context("cannot write to stdout"))
        }
    };
    result.code(INVALID_INPUT)
}

fn apply_overrides(o: &ScenarioOverrides) -> ScenarioParams {
    let mut p = ScenarioParams::default();
    if let Some(v) = o.p_max_dbm {
        p.p_max_dbm = v;
    }
    if let Some(v) = o.bandwidth_hz {
        p.bandwidth_hz = v;
    }
    if let Some(v) = o.upload_bits {
        p.upload_bits = v;
    }
    if let Some(v) = o.samples {
        p.samples = v;
    }
    if let Some(v) = o.f_max_hz {
        p.f_max_hz = v;
    }
    if let Some(v) = o.area_side_m {
        p.area_side_m = v;
    }
    if let Some(v) = o.epsilon0 {
        p.learning.global_accuracy = v;
    }
    if let Some(v) = o.xi {
        p.learning.xi = v;
    }
    if let Some(v) = o.delta {
        p.learning.step = v;
    }
    p
}

fn gen_cmd(a: GenArgs) -> Result<(), Failure> {
    let params = apply_overrides(&a.overrides);
    let scenario = generate_scenario(a.seed, a.k as usize, &params).code(INVALID_INPUT)?;
    write_output(a.out.as_deref(), |w| {
        writeln!(w, "{}", scenario.to_json())?;
        Ok(())
    })
}

fn read_scenario(path: &PathBuf) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .code(INVALID_INPUT)?;
    Scenario::from_json(&text)
        .with_context(|| format!("{}", path.display()))
        .code(INVALID_INPUT)
}

fn solver_code(e: &OptimizerError) -> u8 {
    match e {
        OptimizerError::Model(_) => INVALID_INPUT,
        OptimizerError::Infeasible(_)
        | OptimizerError::EmptyDomain { .. }
        | OptimizerError::NoTransmitTime { .. }
        | OptimizerError::AboveCapacity { .. } => INFEASIBLE,
        OptimizerError::Numerics(_) | OptimizerError::Invariant(_) => INVARIANT,
    }
}

fn solver_options(rel_tol: f64) -> Result<SolverOptions, Failure> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(failure(USAGE, anyhow!("--rel-tol must lie in (0, 1), got {rel_tol}")));
    }
    Ok(SolverOptions::default().with_rel_tol(rel_tol))
}

fn optimize(a: OptimizeArgs) -> Result<(), Failure> {
    let opts = solver_options(a.rel_tol)?;
    let scenario = read_scenario(&a.scenario)?;
    let alloc = solve(&scenario, a.scheme, &opts).map_err(|e| failure(solver_code(&e), e.into()))?;
    alloc.validate(&scenario).code(INVARIANT)?;
    log::info!(
        "{}: total delay {} s at eta = {} after {} outer steps",
        a.scheme,
        alloc.total_delay,
        alloc.eta,
        alloc.solver.outer_iterations
    );
    write_output(a.out.as_deref(), |w| {
        writeln!(w, "{}", alloc.to_json())?;
        Ok(())
    })
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let opts = solver_options(a.rel_tol)?;
    let parameter = match a.param {
        SweepParam::PMaxDbm => SweepParameter::PMaxDbm,
        SweepParam::BandwidthHz => SweepParameter::BandwidthHz,
        SweepParam::K => SweepParameter::Users,
        SweepParam::UploadBits => SweepParameter::UploadBits,
    };
    let mut spec = SweepSpec::new(parameter, a.values, a.draws as usize, a.seed);
    spec.users = a.k as usize;
    spec.base = apply_overrides(&a.overrides);
    let schemes = if a.scheme.is_empty() {
        Scheme::ALL.to_vec()
    } else {
        a.scheme
    };
    let result = run_sweep(&spec, &schemes, &opts).code(INVALID_INPUT)?;
    for r in result.rows.iter().filter(|r| r.failed_draws > 0) {
        log::warn!(
            "{} = {}, {}: {} of {} draws failed ({})",
            parameter,
            r.parameter_value,
            r.scheme,
            r.failed_draws,
            spec.draws,
            r.error.as_deref().unwrap_or("")
        );
    }
    write_output(a.out.as_deref(), |w| Ok(result.write_csv(w)?))
}

/// Data and training errors, divergence included, come from the inputs.
fn fl<T>(r: Result<T, FlError>) -> Result<T, Failure> {
    r.code(INVALID_INPUT)
}

fn load_dataset(a: &TrainArgs) -> Result<Dataset, Failure> {
    match &a.data {
        Some(path) => fl(load_csv(
            path,
            &CsvPartition {
                users: a.users as usize,
                samples_per_user: a.samples,
                seed: a.seed,
            },
        )),
        None => fl(synth_dataset(&SynthSpec {
            seed: a.seed,
            users: a.users as usize,
            dim: a.dim,
            samples: a.samples.unwrap_or(100),
            condition_number: a.cond,
            noise: a.noise,
        })),
    }
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    if !(a.eta > 0.0 && a.eta < 1.0) {
        return Err(failure(USAGE, anyhow!("--eta must lie in (0, 1), got {}", a.eta)));
    }
    if !(a.ridge >= 0.0) {
        return Err(failure(USAGE, anyhow!("--ridge must be >= 0, got {}", a.ridge)));
    }
    let ds = load_dataset(&a)?;
    let loss = match a.loss {
        LossArg::Convex => Loss::convex(),
        LossArg::Nonconvex => Loss::nonconvex(),
    }
    .with_ridge(a.ridge);

    // Curvature of the squared loss on these features sets the default step
    // and iteration count for either loss.
    let curvature = fl(estimate_smoothness(&ds, &Loss::convex().with_ridge(a.ridge)))?;
    let step = a.delta.unwrap_or(1.0 / curvature.lipschitz);
    if !(step > 0.0) {
        return Err(failure(USAGE, anyhow!("--delta must be positive, got {step}")));
    }
    if step * curvature.lipschitz >= 2.0 {
        log::warn!(
            "step {step} is not below 2/L = {}; local solves may diverge",
            2.0 / curvature.lipschitz
        );
    }
    let halvings = (1.0 / a.eta).log2();
    let v = match a.local_iters {
        Some(0) => return Err(failure(USAGE, anyhow!("--local-iters must be at least 1"))),
        Some(n) => n as f64 / halvings,
        None => {
            let denom = (2.0 - curvature.lipschitz * step) * step * curvature.strong_convexity;
            if !(denom > 0.0) {
                return Err(failure(
                    INVALID_INPUT,
                    anyhow!(
                        "cannot derive the local iteration count (gamma = {}, L delta = {}); pass --local-iters or a positive --ridge",
                        curvature.strong_convexity,
                        curvature.lipschitz * step
                    ),
                ));
            }
            2.0 / denom
        }
    };
    let optimum = match a.loss {
        LossArg::Nonconvex => None,
        LossArg::Convex if a.ridge == 0.0 && ds.known_optimum().is_some() => ds.known_optimum(),
        LossArg::Convex => ds.least_squares(a.ridge).map(|(_, f)| f),
    };
    if a.target_accuracy.is_some() && optimum.is_none() {
        return Err(failure(
            USAGE,
            anyhow!("--target-accuracy needs a known optimum (convex loss, nonsingular data)"),
        ));
    }
    let init = a.init.unwrap_or(match a.loss {
        LossArg::Convex => 0.0,
        LossArg::Nonconvex => 1e-3,
    });
    let config = TrainConfig {
        loss,
        xi: a.xi,
        step,
        v,
        eta: a.eta,
        max_rounds: a.max_rounds,
        optimum,
        target_accuracy: a.target_accuracy,
        rel_change_tol: 1e-9,
        initial_weights: Some(vec![init; ds.dim()]),
    };
    log::info!(
        "{} users, d = {}, L = {}, gamma = {}, step = {step}, v = {v}",
        ds.num_users(),
        ds.dim(),
        curvature.lipschitz,
        curvature.strong_convexity
    );
    let log = fl(federated_train(&ds, &config))?;
    let last = log.records.last().expect("round 0 is always logged");
    log::info!("stopped after {} rounds at loss {}", last.round, last.global_loss);
    write_output(a.out.as_deref(), |w| Ok(log.write_csv(w)?))
}

fn verify_cmd(a: VerifyArgs) -> Result<(), Failure> {
    let level = match a.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let mut results = Vec::new();
    for &id in verify::criteria(level) {
        let r = verify::run(id).expect("known criterion");
        if !a.json {
            println!("{r}");
        }
        results.push(r);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&results).code(INVARIANT)?);
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failure(INVARIANT, anyhow!("criteria {failed:?} failed")))
    }
}
