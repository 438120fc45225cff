//! `kzz`: Monte-Carlo check of the mutual-information identity on a preset prior.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use sdelimits::kzz::{verify_kzz, KzzConfig, KzzPreset};

use super::{write_config_echo, Context};
use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::to_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// Scalar drift ±1 with equal weights.
    ConstantPm1,
    /// Off-diagonal sign flips of a 2x2 linear drift.
    LinearFlip,
}

impl PresetArg {
    fn name(self) -> &'static str {
        match self {
            Self::ConstantPm1 => "constant-pm1",
            Self::LinearFlip => "linear-flip",
        }
    }
}

#[derive(Debug, Args)]
pub struct KzzArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Observation horizon.
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Number of Monte-Carlo paths.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Relative tolerance for the pass verdict.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KzzRunConfig {
    pub preset: KzzPreset,
    pub t: f64,
    pub eta: f64,
    pub paths: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub threads: usize,
}

pub fn run(args: &KzzArgs, ctx: &Context) -> CliResult<()> {
    let mut o = ctx.global_overrides(true, true);
    o.set("preset", args.preset.map(PresetArg::name))
        .set("t", args.t)
        .set("eta", args.eta)
        .set("paths", args.paths)
        .set("rel_tol", args.rel_tol);
    let defaults = json!({"t": 1.0, "eta": 1e-3, "paths": 10_000, "rel_tol": 0.02, "seed": 0, "threads": 1});
    let res = ctx.resolve("kzz", defaults, o)?;
    let cfg: KzzRunConfig = config::finish(res.doc.clone())?;
    if cfg.paths < 2 || cfg.threads == 0 {
        return Err(CliError::config("need at least 2 paths and 1 thread"));
    }

    let prior = cfg.preset.prior()?;
    let run_cfg = KzzConfig {
        eta: cfg.eta,
        rel_tol: cfg.rel_tol,
        threads: cfg.threads,
        ..KzzConfig::new(cfg.t, cfg.paths, cfg.seed)
    };
    let report = verify_kzz(&prior, &run_cfg)?;
    if let Some(out) = res.requested_out_dir()? {
        write_config_echo(&out, "kzz", &cfg)?;
        out.write_json("kzz.json", &json!({"config": super::echo("kzz", &cfg), "report": report}))?;
    }
    print!("{}", to_json(&report));
    Ok(())
}
