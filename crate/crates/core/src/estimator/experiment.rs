use std::io::Write;

use serde::{Deserialize, Serialize};

use super::lasso::{default_lambda, lasso, LassoOptions, DEFAULT_LAMBDA_SCALE};
use super::regression::StatsAccumulator;
use super::support::signed_support;
use crate::bounds::{lower_bound_dense, lower_bound_sparse};
use crate::ensembles::{dense_ensemble_sample, sparse_ensemble_sample, DenseEnsembleSpec, SparseEnsembleSpec};
use crate::parallel::run_trials;
use crate::sde::{DriftModel, EulerMaruyama, InteractionMatrix, StationarySampler};
use crate::{linalg, rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum EnsembleSpec {
    Sparse(SparseEnsembleSpec),
    Dense(DenseEnsembleSpec),
}

impl EnsembleSpec {
    pub fn p(&self) -> usize {
        match self {
            Self::Sparse(s) => s.p,
            Self::Dense(s) => s.p,
        }
    }

    /// Row degree for the sparse ensemble, expected off-diagonal fill for the dense one.
    pub fn k_or_density(&self) -> f64 {
        match self {
            Self::Sparse(s) => s.k as f64,
            Self::Dense(_) => 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Sparse(s) => s.validate(),
            Self::Dense(s) => s.validate(),
        }
    }

    pub fn sample(&self, seed: u64) -> Result<InteractionMatrix> {
        match self {
            Self::Sparse(s) => sparse_ensemble_sample(s, seed),
            Self::Dense(s) => dense_ensemble_sample(s, seed),
        }
    }

    /// Half the smallest nonzero off-diagonal magnitude.
    pub fn default_tau(&self) -> f64 {
        match self {
            Self::Sparse(s) => 0.5 * s.a_min,
            Self::Dense(s) => 0.5 * s.a_min / (s.p as f64).sqrt(),
        }
    }

    /// Lower bound on the observation time for this ensemble.
    pub fn t_min(&self) -> Result<f64> {
        Ok(match self {
            Self::Sparse(s) => lower_bound_sparse(s.p, s.k, s.a_min, s.rho)?.t_min,
            Self::Dense(s) => lower_bound_dense(s.p, s.a_min, s.rho)?.t_min,
        })
    }
}

fn default_level() -> f64 {
    0.9
}

fn default_lambda_scale() -> f64 {
    DEFAULT_LAMBDA_SCALE
}

fn default_step_scale() -> f64 {
    0.01
}

fn default_threads() -> usize {
    1
}

/// Monte-Carlo recovery sweep over observation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub ensemble: EnsembleSpec,
    /// Increasing observation times; every trial runs one path to the last
    /// value and is evaluated on each prefix.
    pub t_grid: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_level")]
    pub success_level: f64,
    #[serde(default)]
    pub seed: u64,
    /// `c` in `λ = c √(log p / T)`.
    #[serde(default = "default_lambda_scale")]
    pub lambda_scale: f64,
    /// Support threshold; half the coupling floor when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Step size is `step_scale / ‖A‖_∞`.
    #[serde(default = "default_step_scale")]
    pub step_scale: f64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl PhaseConfig {
    pub fn new(ensemble: EnsembleSpec, t_grid: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            ensemble,
            t_grid,
            trials,
            success_level: default_level(),
            seed,
            lambda_scale: DEFAULT_LAMBDA_SCALE,
            tau: None,
            step_scale: default_step_scale(),
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        validate_grid(&self.t_grid, self.trials)?;
        if !(self.step_scale > 0.0 && self.step_scale <= 0.5) {
            return Err(Error::invalid(format!("step_scale must be in (0, 0.5], got {}", self.step_scale)));
        }
        if !(self.lambda_scale >= 0.0) {
            return Err(Error::invalid("lambda_scale must be >= 0"));
        }
        Ok(())
    }
}

pub(crate) fn validate_grid(t_grid: &[f64], trials: usize) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("T grid must be non-empty and positive"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("T grid must be strictly increasing"));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    Ok(())
}

/// One line of a sweep: how many trials recovered the support at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub p: usize,
    pub k_or_density: f64,
    pub t: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub t_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOutcome {
    pub rows: Vec<PhaseRow>,
    pub success_level: f64,
    /// Smallest grid time reaching the success level.
    pub t_star: Option<f64>,
    /// Trials whose simulation or fit failed; they count as failures.
    pub failed_trials: usize,
}

impl PhaseOutcome {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "p,k_or_density,T,trials,successes,success_rate,t_min")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.p, r.k_or_density, r.t, r.trials, r.successes, r.success_rate, r.t_min
            )?;
        }
        Ok(())
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.success_rate).collect()
    }
}

/// Smallest `t` whose success rate reaches `level`.
pub fn t_star(rows: &[PhaseRow], level: f64) -> Option<f64> {
    rows.iter().find(|r| r.success_rate >= level).map(|r| r.t)
}

/// Largest distance between a sequence and its nondecreasing least-squares
/// fit (pool-adjacent-violators).
pub fn isotonic_deviation(values: &[f64]) -> f64 {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, n2) = blocks.pop().expect("two blocks");
            let (m1, n1) = blocks.pop().expect("two blocks");
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / (n1 + n2) as f64, n1 + n2));
        }
    }
    let fit = blocks.iter().flat_map(|&(m, n)| std::iter::repeat_n(m, n));
    values.iter().zip(fit).fold(0.0, |d, (v, f)| d.max((v - f).abs()))
}

/// Step counts at which each grid time is reached.
pub(crate) fn checkpoints(t_grid: &[f64], eta: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let n = ((t / eta).round() as usize).max(2);
        out.push(n.max(out.last().map_or(0, |&m| m + 1)));
    }
    out
}

/// Exact-recovery indicator at each grid time for one trial.
fn linear_trial(cfg: &PhaseConfig, trial: u64) -> Result<Vec<bool>> {
    let a = cfg.ensemble.sample(rng::derive_seed(cfg.seed, trial))?;
    let p = a.dim();
    let truth = signed_support(a.entries(), 0.0);
    let eta = cfg.step_scale / linalg::inf_norm(a.entries());
    let x0 = StationarySampler::new(&a)?.sample(&mut rng::stream(cfg.seed, 2 * trial));
    let model = DriftModel::linear(a);
    let mut em = EulerMaruyama::with_rng(&model, &x0, eta, rng::stream(cfg.seed, 2 * trial + 1))?;
    let tau = cfg.tau.unwrap_or_else(|| cfg.ensemble.default_tau());
    let options = LassoOptions::default();

    let mut acc = StatsAccumulator::new(p, p, eta);
    let mut prev = x0;
    let mut increment = vec![0.0; p];
    let mut outcome = Vec::with_capacity(cfg.t_grid.len());
    for n in checkpoints(&cfg.t_grid, eta) {
        while acc.len() < n {
            let next = em.step()?;
            for i in 0..p {
                increment[i] = next[i] - prev[i];
            }
            acc.push(&prev, &increment);
            prev.copy_from_slice(next);
        }
        let stats = acc.snapshot();
        let lambda = default_lambda(cfg.lambda_scale, p, stats.duration());
        let fit = lasso(&stats, lambda, &options)?;
        outcome.push(signed_support(&fit.coefficients, tau) == truth);
    }
    Ok(outcome)
}

/// Success rate of exact signed-support recovery at each grid time, and the
/// first time it reaches `success_level`.
pub fn estimate_sample_complexity(cfg: &PhaseConfig) -> Result<PhaseOutcome> {
    cfg.validate()?;
    let results = run_trials(cfg.trials, cfg.threads, |t| linear_trial(cfg, t));
    let mut successes = vec![0usize; cfg.t_grid.len()];
    let mut failed_trials = 0;
    for r in results {
        match r {
            Ok(hits) => {
                for (s, h) in successes.iter_mut().zip(hits) {
                    *s += h as usize;
                }
            }
            Err(e) => {
                log::warn!("trial failed: {e}");
                failed_trials += 1;
            }
        }
    }
    let t_min = cfg.ensemble.t_min()?;
    let rows: Vec<PhaseRow> = cfg
        .t_grid
        .iter()
        .zip(successes)
        .map(|(&t, s)| PhaseRow {
            p: cfg.ensemble.p(),
            k_or_density: cfg.ensemble.k_or_density(),
            t,
            trials: cfg.trials,
            successes: s,
            success_rate: s as f64 / cfg.trials as f64,
            t_min,
        })
        .collect();
    Ok(PhaseOutcome { t_star: t_star(&rows, cfg.success_level), rows, success_level: cfg.success_level, failed_trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_deviation_examples() {
        assert_eq!(isotonic_deviation(&[0.0, 0.2, 0.5, 1.0]), 0.0);
        assert!((isotonic_deviation(&[0.0, 0.6, 0.4, 1.0]) - 0.1).abs() < 1e-12);
        assert!((isotonic_deviation(&[1.0, 0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn checkpoints_are_increasing() {
        assert_eq!(checkpoints(&[1.0, 2.0], 0.1), vec![10, 20]);
        assert_eq!(checkpoints(&[0.01, 0.02], 0.1), vec![2, 3]);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: PhaseConfig = serde_json::from_str(
            r#"{"ensemble": {"regime": "sparse", "p": 16, "k": 3, "a_min": 1.0, "rho": 0.1},
                "t_grid": [10, 20], "trials": 2}"#,
        )
        .unwrap();
        assert_eq!(cfg.success_level, 0.9);
        assert_eq!(cfg.ensemble.default_tau(), 0.5);
        assert!(cfg.validate().is_ok());
        let bad = PhaseConfig { t_grid: vec![20.0, 10.0], ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parallel_trials_match_serial() {
        let cfg = PhaseConfig::new(
            EnsembleSpec::Sparse(SparseEnsembleSpec { p: 8, k: 3, a_min: 1.0, rho: 0.5 }),
            vec![5.0, 40.0],
            4,
            7,
        );
        let serial = estimate_sample_complexity(&cfg).unwrap();
        let parallel = estimate_sample_complexity(&PhaseConfig { threads: 3, ..cfg }).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial.rows.len(), 2);
    }
}
