//! `simulate`: one Euler-Maruyama path written as trajectory CSV.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use sdelimits::rng;
use sdelimits::sde::{default_step, simulate, write_matrix, write_trajectory_csv, StationarySampler, Trajectory};

use super::args::ModelArgs;
use super::model::{fill_defaults, BuiltModel, ModelKind, ModelSpec};
use super::{write_config_echo, Context};
use crate::config::{self, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// Draw from the stationary law (linear models).
    Stationary,
    Zero,
    /// Rest configuration (mass-spring).
    Rest,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Observation length.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Step size; 0.01/‖A‖∞ for linear drifts and 0.005 for mass-spring by default.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub start: Option<Start>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Start>,
    pub seed: u64,
}

/// Seeds for the matrix draw, the initial state and the noise.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Seeds {
    pub master: u64,
    pub model: u64,
    pub initial_stream: u64,
    pub noise: u64,
}

impl Seeds {
    pub fn new(master: u64) -> Self {
        Self { master, model: rng::derive_seed(master, 0), initial_stream: 1, noise: rng::derive_seed(master, 2) }
    }
}

/// Resolves `model` and simulates `t` time units from `start`.
pub fn path_for(
    built: &BuiltModel,
    kind: ModelKind,
    t: f64,
    eta: Option<f64>,
    start: Option<Start>,
    seeds: &Seeds,
) -> CliResult<Trajectory> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::config(format!("T must be positive, got {t}")));
    }
    let eta = eta.unwrap_or_else(|| default_step(&built.model));
    if !(eta > 0.0 && eta < t) {
        return Err(CliError::config(format!("eta must lie in (0, T), got {eta}")));
    }
    let dim = built.model.state_dim();
    let start = start.unwrap_or(if kind == ModelKind::Spring { Start::Rest } else { Start::Stationary });
    let x0 = match (start, &built.linear, &built.network) {
        (Start::Stationary, Some(a), _) => {
            StationarySampler::new(a)?.sample(&mut rng::stream(seeds.master, seeds.initial_stream))
        }
        (Start::Rest, _, Some(net)) => net.rest_state(),
        (Start::Zero, _, _) => vec![0.0; dim],
        (s, _, _) => {
            return Err(CliError::config(
                format!("start {s:?} does not apply to model kind {}", kind.name()).to_lowercase(),
            ));
        }
    };
    let n_steps = ((t / eta).round() as usize).max(1);
    Ok(simulate(&built.model, &x0, eta, n_steps, seeds.noise)?)
}

pub fn run(args: &SimulateArgs, ctx: &Context) -> CliResult<()> {
    let mut o: Overrides = ctx.global_overrides(true, false);
    args.model.apply(&mut o);
    o.set("t", args.t).set("eta", args.eta).set("start", args.start);
    let mut res = ctx.resolve("simulate", json!({"seed": 0}), o)?;
    fill_defaults(&mut res.doc, "model");
    let cfg: SimulateConfig = config::finish(res.doc.clone())?;

    let seeds = Seeds::new(cfg.seed);
    let built = cfg.model.build(seeds.model)?;
    let traj = path_for(&built, cfg.model.kind, cfg.t, cfg.eta, cfg.start, &seeds)?;

    let out = res.out_dir()?;
    write_config_echo(&out, "simulate", &cfg)?;
    write_outputs(&out, &cfg, &seeds, &built, &traj)
}

fn write_outputs(
    out: &OutDir,
    cfg: &SimulateConfig,
    seeds: &Seeds,
    built: &BuiltModel,
    traj: &Trajectory,
) -> CliResult<()> {
    out.write_with("trajectory.csv", |w| Ok(write_trajectory_csv(traj, w)?))?;
    if let Some(a) = &built.linear {
        out.write_with("drift.txt", |w| Ok(write_matrix(a.entries(), w)?))?;
    }
    let summary = json!({
        "config": super::echo("simulate", cfg),
        "seeds": seeds,
        "eta": traj.eta(),
        "n_steps": traj.n_steps(),
        "duration": traj.duration(),
        "state_dim": traj.dim(),
        "springs": built.network.as_ref().map(|n| n.springs().to_vec()),
    });
    out.write_json("simulate.json", &summary)?;
    println!(
        "{} steps of {} coordinates written to {}",
        traj.n_steps(),
        traj.dim(),
        out.path("trajectory.csv").display()
    );
    Ok(())
}
