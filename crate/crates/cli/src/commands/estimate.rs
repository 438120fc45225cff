//! `estimate`: l1 drift fit and signed-support comparison for one path.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use sdelimits::estimator::{
    default_lambda, lasso, signed_support, LassoOptions, RecoveryResult, StatsAccumulator, DEFAULT_LAMBDA_SCALE,
};
use sdelimits::sde::{read_trajectory_csv, write_matrix, write_trajectory_csv, Trajectory};

use super::args::ModelArgs;
use super::model::{fill_defaults, half_smallest_coupling, read_matrix_file, ModelKind, ModelSpec};
use super::simulate::{path_for, Seeds, Start};
use super::{write_config_echo, Context};
use crate::config::{self, Overrides};
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Trajectory CSV to fit instead of simulating one.
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
    /// True interaction matrix for a given trajectory.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Observation length (prefix length for a given trajectory).
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub start: Option<Start>,
    /// Penalty; c·√(log p / T) when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// The constant c of the default penalty.
    #[arg(long)]
    pub lambda_scale: Option<f64>,
    /// Support threshold; half the coupling floor when absent.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Start>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub lambda_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub seed: u64,
}

struct Problem {
    traj: Trajectory,
    truth: DMatrix<f64>,
    tau: Option<f64>,
    simulated: bool,
}

fn load_problem(cfg: &EstimateConfig, seeds: &Seeds) -> CliResult<Problem> {
    match (&cfg.model, &cfg.trajectory) {
        (Some(_), Some(_)) => Err(CliError::config("give either model or trajectory, not both")),
        (None, None) => Err(CliError::config("one of model or trajectory is required")),
        (None, Some(path)) => {
            let truth_path =
                cfg.truth.as_deref().ok_or_else(|| CliError::config("truth is required with trajectory"))?;
            let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut traj = read_trajectory_csv(BufReader::new(f), cfg.seed)?;
            if let Some(t) = cfg.t {
                traj = traj.truncated((t / traj.eta()).round() as usize);
            }
            let truth = read_matrix_file(truth_path)?;
            if truth.nrows() != traj.dim() {
                return Err(CliError::config(format!(
                    "truth is {}x{} but the trajectory has {} coordinates",
                    truth.nrows(),
                    truth.ncols(),
                    traj.dim()
                )));
            }
            Ok(Problem { traj, truth, tau: None, simulated: false })
        }
        (Some(model), None) => {
            if model.kind == ModelKind::Spring {
                return Err(CliError::config(
                    "estimate fits linear drifts; use reproduce-spring for mass-spring networks",
                ));
            }
            if cfg.truth.is_some() {
                return Err(CliError::config("truth only applies to a given trajectory"));
            }
            let t = cfg.t.ok_or_else(|| CliError::config("t is required when simulating"))?;
            let built = model.build(seeds.model)?;
            let traj = path_for(&built, model.kind, t, cfg.eta, cfg.start, seeds)?;
            let truth = built.linear.expect("linear kinds").into_entries();
            Ok(Problem { traj, truth, tau: built.tau, simulated: true })
        }
    }
}

pub fn run(args: &EstimateArgs, ctx: &Context) -> CliResult<()> {
    let mut o: Overrides = ctx.global_overrides(true, false);
    args.model.apply(&mut o);
    o.set("trajectory", args.trajectory.as_ref())
        .set("truth", args.truth.as_ref())
        .set("t", args.t)
        .set("eta", args.eta)
        .set("start", args.start)
        .set("lambda", args.lambda)
        .set("lambda_scale", args.lambda_scale)
        .set("tau", args.tau);
    let mut res = ctx.resolve("estimate", json!({"seed": 0, "lambda_scale": DEFAULT_LAMBDA_SCALE}), o)?;
    fill_defaults(&mut res.doc, "model");
    let cfg: EstimateConfig = config::finish(res.doc.clone())?;
    if cfg.lambda.is_some_and(|l| !(l >= 0.0)) || !(cfg.lambda_scale >= 0.0) || cfg.tau.is_some_and(|t| !(t >= 0.0)) {
        return Err(CliError::config("lambda, lambda_scale and tau must be >= 0"));
    }

    let seeds = Seeds::new(cfg.seed);
    let problem = load_problem(&cfg, &seeds)?;
    let traj = &problem.traj;
    let p = traj.dim();
    if traj.n_steps() < 2 {
        return Err(CliError::config("trajectory needs at least two increments"));
    }
    let mut acc = StatsAccumulator::new(p, p, traj.eta());
    let mut increment = vec![0.0; p];
    for t in 0..traj.n_steps() {
        let (x, next) = (traj.state(t), traj.state(t + 1));
        for i in 0..p {
            increment[i] = next[i] - x[i];
        }
        acc.push(x, &increment);
    }
    let stats = acc.snapshot();
    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(cfg.lambda_scale, p, stats.duration()));
    let fit = lasso(&stats, lambda, &LassoOptions::default())?;
    let tau = cfg.tau.or(problem.tau).or_else(|| half_smallest_coupling(problem.truth.iter().copied())).unwrap_or(0.0);
    let result = RecoveryResult::compare(
        &signed_support(&fit.coefficients, tau),
        &signed_support(&problem.truth, 0.0),
        lambda,
        tau,
        stats.duration(),
    );

    let out = res.out_dir()?;
    write_config_echo(&out, "estimate", &cfg)?;
    if problem.simulated {
        out.write_with("trajectory.csv", |w| Ok(write_trajectory_csv(traj, w)?))?;
        out.write_with("drift.txt", |w| Ok(write_matrix(&problem.truth, w)?))?;
    }
    out.write_with("estimated_drift.txt", |w| Ok(write_matrix(&fit.coefficients, w)?))?;
    let report = json!({
        "config": super::echo("estimate", &cfg),
        "seeds": seeds,
        "sweeps": fit.sweeps,
        "result": result,
    });
    out.write_json("estimate.json", &report)?;
    println!(
        "T = {}: {} ({} sign errors, lambda {lambda:.4e}, tau {tau:.4e})",
        result.duration,
        if result.success { "exact recovery" } else { "recovery failed" },
        result.errors()
    );
    Ok(())
}
