//! `phase`: recovery success rate against observation time, with the
//! theoretical lower bound alongside.

use std::io::Write;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sdelimits::ensembles::{DenseEnsembleSpec, SparseEnsembleSpec};
use sdelimits::estimator::{estimate_sample_complexity, EnsembleSpec, PhaseConfig, PhaseOutcome};

use super::{write_config_echo, Context};
use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

/// Largest dimensions accepted per regime, to keep sweeps at minutes scale.
const MAX_P_SPARSE: usize = 64;
const MAX_P_DENSE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PhaseRegime {
    Sparse,
    Dense,
}

impl PhaseRegime {
    fn name(self) -> &'static str {
        match self {
            Self::Sparse => "sparse",
            Self::Dense => "dense",
        }
    }
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, value_enum)]
    pub regime: Option<PhaseRegime>,
    /// Dimensions to sweep, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<usize>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub a_min: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Observation times, comma separated and increasing.
    #[arg(long = "T-grid", value_delimiter = ',', num_args = 1..)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub success_level: Option<f64>,
    #[arg(long)]
    pub lambda_scale: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Step size as a fraction of 1/‖A‖∞.
    #[arg(long)]
    pub step_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRunConfig {
    pub regime: PhaseRegime,
    pub p: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub a_min: f64,
    pub rho: f64,
    pub t_grid: Vec<f64>,
    pub trials: usize,
    pub success_level: f64,
    pub lambda_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub step_scale: f64,
    pub seed: u64,
    pub threads: usize,
}

impl PhaseRunConfig {
    /// One sweep configuration per dimension, in increasing `p`.
    pub fn sweeps(&self) -> CliResult<Vec<PhaseConfig>> {
        if self.p.is_empty() {
            return Err(CliError::config("p must list at least one dimension"));
        }
        if self.p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("p must be strictly increasing"));
        }
        if !(self.success_level > 0.0 && self.success_level <= 1.0) {
            return Err(CliError::config(format!("success_level must be in (0, 1], got {}", self.success_level)));
        }
        let cap = match self.regime {
            PhaseRegime::Sparse => MAX_P_SPARSE,
            PhaseRegime::Dense => MAX_P_DENSE,
        };
        if let Some(&p) = self.p.iter().find(|&&p| p > cap) {
            return Err(CliError::config(format!(
                "phase sweeps cap p at {cap} for the {} regime, got {p}",
                self.regime.name()
            )));
        }
        if self.regime == PhaseRegime::Dense && self.k.is_some() {
            return Err(CliError::config("k does not apply to the dense regime"));
        }
        self.p
            .iter()
            .map(|&p| {
                let ensemble = match self.regime {
                    PhaseRegime::Sparse => EnsembleSpec::Sparse(SparseEnsembleSpec {
                        p,
                        k: self.k.unwrap_or(3),
                        a_min: self.a_min,
                        rho: self.rho,
                    }),
                    PhaseRegime::Dense => {
                        EnsembleSpec::Dense(DenseEnsembleSpec { p, a_min: self.a_min, rho: self.rho })
                    }
                };
                let cfg = PhaseConfig {
                    success_level: self.success_level,
                    lambda_scale: self.lambda_scale,
                    tau: self.tau,
                    step_scale: self.step_scale,
                    threads: self.threads,
                    ..PhaseConfig::new(ensemble, self.t_grid.clone(), self.trials, self.seed)
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

/// Writes the sweep table sorted by `(p, T)`, one regime per run.
pub fn write_table<W: Write>(regime: PhaseRegime, outcomes: &[PhaseOutcome], mut w: W) -> CliResult<()> {
    writeln!(w, "regime,p,k_or_density,T,trials,successes,success_rate,t_min")?;
    let mut rows: Vec<_> = outcomes.iter().flat_map(|o| o.rows.iter()).collect();
    rows.sort_by(|a, b| a.p.cmp(&b.p).then(a.t.total_cmp(&b.t)));
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            regime.name(),
            r.p,
            r.k_or_density,
            r.t,
            r.trials,
            r.successes,
            r.success_rate,
            r.t_min
        )?;
    }
    Ok(())
}

/// Per-`p` threshold times, the theory column, and `T*` ratios between
/// consecutive dimensions where both were reached.
pub fn summary(cfg: &PhaseRunConfig, outcomes: &[PhaseOutcome]) -> Value {
    let reached = |t: Option<f64>| t.map_or(json!("not reached"), |t| json!(t));
    let cells: Vec<Value> = outcomes
        .iter()
        .filter_map(|o| o.rows.first().map(|r| (o, r)))
        .map(|(o, r)| {
            json!({
                "p": r.p,
                "k_or_density": r.k_or_density,
                "t_min": r.t_min,
                "t_star": reached(o.t_star),
                "failed_trials": o.failed_trials,
                "success_rate": o.rates(),
            })
        })
        .collect();
    let ratios: Vec<Value> = outcomes
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].t_star?, w[1].t_star?);
            Some(json!({"p_from": w[0].rows[0].p, "p_to": w[1].rows[0].p, "ratio": b / a}))
        })
        .collect();
    json!({
        "config": super::echo("phase", cfg),
        "regime": cfg.regime,
        "success_level": cfg.success_level,
        "t_grid": cfg.t_grid,
        "cells": cells,
        "t_star_ratios": ratios,
    })
}

pub fn run(args: &PhaseArgs, ctx: &Context) -> CliResult<()> {
    let mut o = ctx.global_overrides(true, true);
    o.set("regime", args.regime.map(PhaseRegime::name))
        .set("p", args.p.as_ref())
        .set("k", args.k)
        .set("a_min", args.a_min)
        .set("rho", args.rho)
        .set("t_grid", args.t_grid.as_ref())
        .set("trials", args.trials)
        .set("success_level", args.success_level)
        .set("lambda_scale", args.lambda_scale)
        .set("tau", args.tau)
        .set("step_scale", args.step_scale);
    let defaults = json!({
        "a_min": 1.0,
        "rho": 0.1,
        "trials": 50,
        "success_level": 0.9,
        "lambda_scale": sdelimits::estimator::DEFAULT_LAMBDA_SCALE,
        "step_scale": 0.01,
        "seed": 0,
        "threads": 1,
    });
    let mut res = ctx.resolve("phase", defaults, o)?;
    if res.doc.get("regime").and_then(Value::as_str) == Some("sparse") {
        res.doc.as_object_mut().expect("object").entry("k").or_insert(3.into());
    }
    let cfg: PhaseRunConfig = config::finish(res.doc.clone())?;
    let sweeps = cfg.sweeps()?;

    let mut outcomes = Vec::with_capacity(sweeps.len());
    for s in &sweeps {
        log::info!("p = {}: {} trials over {} observation times", s.ensemble.p(), s.trials, s.t_grid.len());
        let outcome = estimate_sample_complexity(s)?;
        if outcome.failed_trials > 0 {
            log::warn!("p = {}: {} trials failed and count as failures", s.ensemble.p(), outcome.failed_trials);
        }
        outcomes.push(outcome);
    }

    let out = res.out_dir()?;
    write_outputs(&out, &cfg, &outcomes)
}

fn write_outputs(out: &OutDir, cfg: &PhaseRunConfig, outcomes: &[PhaseOutcome]) -> CliResult<()> {
    write_config_echo(out, "phase", cfg)?;
    out.write_with("phase.csv", |w| write_table(cfg.regime, outcomes, w))?;
    out.write_json("summary.json", &summary(cfg, outcomes))?;
    for o in outcomes {
        let r = &o.rows[0];
        match o.t_star {
            Some(t) => println!("p = {}: T* = {t} (t_min = {:.4})", r.p, r.t_min),
            None => println!("p = {}: T* not reached (t_min = {:.4})", r.p, r.t_min),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use sdelimits::estimator::PhaseRow;

    use super::*;

    fn outcome(p: usize, rates: &[f64], t_star: Option<f64>) -> PhaseOutcome {
        let rows = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| PhaseRow {
                p,
                k_or_density: 3.0,
                t: 10.0 * (i + 1) as f64,
                trials: 10,
                successes: (r * 10.0) as usize,
                success_rate: r,
                t_min: 1.5,
            })
            .collect();
        PhaseOutcome { rows, success_level: 0.9, t_star, failed_trials: 0 }
    }

    fn cfg() -> PhaseRunConfig {
        PhaseRunConfig {
            regime: PhaseRegime::Sparse,
            p: vec![16, 32],
            k: Some(3),
            a_min: 1.0,
            rho: 0.1,
            t_grid: vec![10.0, 20.0],
            trials: 10,
            success_level: 0.9,
            lambda_scale: 0.1,
            tau: None,
            step_scale: 0.01,
            seed: 0,
            threads: 1,
        }
    }

    #[test]
    fn unreached_threshold_is_reported_as_text() {
        let s = summary(&cfg(), &[outcome(16, &[0.0, 1.0], Some(20.0)), outcome(32, &[0.0, 0.5], None)]);
        assert_eq!(s["cells"][0]["t_star"], json!(20.0));
        assert_eq!(s["cells"][1]["t_star"], json!("not reached"));
        assert_eq!(s["t_star_ratios"], json!([]));
    }

    #[test]
    fn ratios_between_consecutive_dimensions() {
        let s = summary(&cfg(), &[outcome(16, &[1.0, 1.0], Some(10.0)), outcome(32, &[0.0, 1.0], Some(20.0))]);
        assert_eq!(s["t_star_ratios"][0]["ratio"], json!(2.0));
    }

    #[test]
    fn single_cell_gives_one_row() {
        let mut buf = Vec::new();
        write_table(PhaseRegime::Sparse, &[outcome(16, &[0.5], None)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "sparse,16,3,10,10,5,0.5,1.5");
    }

    #[test]
    fn caps_and_ordering_are_enforced() {
        assert!(cfg().sweeps().is_ok());
        assert!(matches!(PhaseRunConfig { p: vec![128], ..cfg() }.sweeps(), Err(CliError::Config(_))));
        assert!(matches!(PhaseRunConfig { p: vec![32, 16], ..cfg() }.sweeps(), Err(CliError::Config(_))));
        let dense = PhaseRunConfig { regime: PhaseRegime::Dense, k: None, p: vec![48], ..cfg() };
        assert!(dense.sweeps().is_err());
    }
}
