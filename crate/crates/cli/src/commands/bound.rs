//! `bound`: observation-time lower bound for a model class.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use sdelimits::bounds::{
    general_bound, lower_bound_dense, lower_bound_nonlinear, lower_bound_sparse, BoundReport, NonlinearClassParams,
    Regime,
};

use super::{write_config_echo, Context};
use crate::config::{self, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::to_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Sparse,
    Dense,
    Nonlinear,
    Generic,
}

impl RegimeArg {
    fn name(self) -> &'static str {
        match self {
            Self::Sparse => "sparse",
            Self::Dense => "dense",
            Self::Nonlinear => "nonlinear",
            Self::Generic => "generic",
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Row degree (sparse) or sparsity of the drift dependence (nonlinear).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub a_min: Option<f64>,
    /// Stability margin.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Nonlinear class: per-coordinate variance bound.
    #[arg(long)]
    pub b: Option<f64>,
    /// Nonlinear class: covariance eigenvalue floor.
    #[arg(long)]
    pub l: Option<f64>,
    /// Nonlinear class: Lipschitz bound on the drift partials.
    #[arg(long)]
    pub d: Option<f64>,
    /// Nonlinear class: drift bound at the mean.
    #[arg(long)]
    pub c: Option<f64>,
    /// Generic: entropy of the prior per dimension.
    #[arg(long)]
    pub entropy: Option<f64>,
    /// Generic: information carried by the initial state, per dimension.
    #[arg(long)]
    pub mi_x0: Option<f64>,
    /// Generic: conditional-variance rate per dimension.
    #[arg(long)]
    pub variance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_rate: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &str, regime: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("{name} is required for regime {regime}")))
}

impl BoundConfig {
    fn check_unused(&self, regime: &str, allowed: &[&str]) -> CliResult<()> {
        let present = [
            ("p", self.p.is_some()),
            ("k", self.k.is_some()),
            ("a_min", self.a_min.is_some()),
            ("rho", self.rho.is_some()),
            ("b", self.b.is_some()),
            ("l", self.l.is_some()),
            ("d", self.d.is_some()),
            ("c", self.c.is_some()),
            ("entropy", self.entropy.is_some()),
            ("mi_x0", self.mi_x0.is_some()),
            ("variance_rate", self.variance_rate.is_some()),
        ];
        match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            Some((name, _)) => Err(CliError::config(format!("{name} does not apply to regime {regime}"))),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self) -> CliResult<BoundReport> {
        let report = match self.regime {
            Regime::Sparse => {
                self.check_unused("sparse", &["p", "k", "a_min", "rho"])?;
                let r = "sparse";
                lower_bound_sparse(
                    need(self.p, "p", r)?,
                    need(self.k, "k", r)?,
                    need(self.a_min, "a_min", r)?,
                    need(self.rho, "rho", r)?,
                )?
            }
            Regime::Dense => {
                self.check_unused("dense", &["p", "a_min", "rho"])?;
                let r = "dense";
                lower_bound_dense(need(self.p, "p", r)?, need(self.a_min, "a_min", r)?, need(self.rho, "rho", r)?)?
            }
            Regime::Nonlinear => {
                self.check_unused("nonlinear", &["p", "k", "b", "l", "d", "c"])?;
                let r = "nonlinear";
                lower_bound_nonlinear(&NonlinearClassParams {
                    p: need(self.p, "p", r)?,
                    k: need(self.k, "k", r)?,
                    b: need(self.b, "b", r)?,
                    l: need(self.l, "l", r)?,
                    d: need(self.d, "d", r)?,
                    c: need(self.c, "c", r)?,
                })?
            }
            Regime::Generic => {
                self.check_unused("generic", &["entropy", "mi_x0", "variance_rate"])?;
                let r = "generic";
                general_bound(
                    need(self.entropy, "entropy", r)?,
                    need(self.mi_x0, "mi_x0", r)?,
                    need(self.variance_rate, "variance_rate", r)?,
                )?
            }
        };
        Ok(report)
    }
}

pub fn run(args: &BoundArgs, ctx: &Context) -> CliResult<()> {
    let mut o = Overrides::default();
    o.set("regime", args.regime.map(RegimeArg::name))
        .set("p", args.p)
        .set("k", args.k)
        .set("a_min", args.a_min)
        .set("rho", args.rho)
        .set("b", args.b)
        .set("l", args.l)
        .set("d", args.d)
        .set("c", args.c)
        .set("entropy", args.entropy)
        .set("mi_x0", args.mi_x0)
        .set("variance_rate", args.variance_rate);
    let res = ctx.resolve("bound", json!({}), o)?;
    let cfg: BoundConfig = config::finish(res.doc.clone())?;
    let report = cfg.evaluate()?;
    if report.is_vacuous() {
        log::warn!("the bound is vacuous for these parameters (t_min = 0)");
    }
    if let Some(out) = res.requested_out_dir()? {
        write_config_echo(&out, "bound", &cfg)?;
        out.write_json("bound.json", &json!({"config": super::echo("bound", &cfg), "report": report}))?;
    }
    print!("{}", to_json(&report));
    Ok(())
}
