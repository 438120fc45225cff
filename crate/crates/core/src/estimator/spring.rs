use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::experiment::{checkpoints, t_star, validate_grid, PhaseRow};
use super::lasso::{default_lambda, lasso, LassoOptions, DEFAULT_LAMBDA_SCALE};
use super::regression::StatsAccumulator;
use super::support::{gap_threshold, RecoveryResult};
use crate::ensembles::{mass_spring_network, NetworkSpec, SpringNetwork};
use crate::parallel::run_trials;
use crate::sde::{Basis, EulerMaruyama, MassSpringBasis, Trajectory};
use crate::{rng, Error, Result};

fn default_eta() -> f64 {
    0.005
}

fn default_burn_in() -> f64 {
    10.0
}

fn default_stride() -> usize {
    1
}

fn default_lambda_scale() -> f64 {
    DEFAULT_LAMBDA_SCALE
}

fn default_threads() -> usize {
    1
}

/// Edge recovery for a mass-spring network from its velocity increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpringConfig {
    pub network: NetworkSpec,
    pub t_grid: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_lambda_scale")]
    pub lambda_scale: f64,
    /// Edge threshold on [`edge_scores`]; the largest-gap rule when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Time simulated from rest before observation starts.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    /// Keep every `record_stride`-th state when a path is recorded.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl SpringConfig {
    pub fn new(network: NetworkSpec, t_grid: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            network,
            t_grid,
            trials,
            seed,
            eta: default_eta(),
            lambda_scale: DEFAULT_LAMBDA_SCALE,
            tau: None,
            burn_in: default_burn_in(),
            record_stride: 1,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.t_grid, self.trials)?;
        if !(self.eta > 0.0)
            || self.tau.is_some_and(|t| !(t >= 0.0))
            || !(self.burn_in >= 0.0)
            || self.record_stride == 0
        {
            return Err(Error::invalid("eta must be > 0, tau and burn_in >= 0, record_stride >= 1"));
        }
        Ok(())
    }
}

/// Strength of each pair `(i, j)`: RMS of the `Δ^(ij)` coefficients in the
/// velocity rows of masses `i` and `j`, which equals the stiffness for a true spring.
///
/// `coefficients` has one row per velocity coordinate (mass-major) and one
/// column per basis function.
pub fn edge_scores(coefficients: &DMatrix<f64>, basis: &MassSpringBasis, masses: usize, d: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(masses, masses);
    for i in 0..masses {
        for j in i + 1..masses {
            let mut sum = 0.0;
            for m in [i, j] {
                for c in 0..d {
                    for c2 in 0..d {
                        sum += coefficients[(m * d + c, basis.difference_index(i, j, c2))].powi(2);
                    }
                }
            }
            let v = (sum / (2 * d) as f64).sqrt();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Largest-gap threshold over the pair scores `i < j`.
///
/// Near rest the force along a spring is first-order only in the stretch, so
/// the fitted `Δ` block of a true spring is typically smaller than its
/// stiffness and a fixed fraction of the stiffness is not a reliable cut.
fn pair_gap_threshold(scores: &DMatrix<f64>) -> f64 {
    let p = scores.nrows();
    let upper: Vec<f64> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).map(|(i, j)| scores[(i, j)]).collect();
    gap_threshold(&DMatrix::from_column_slice(upper.len(), 1, &upper))
}

/// Recovery results at each grid time for one simulated path, plus the
/// (strided) path itself when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringTrial {
    pub results: Vec<RecoveryResult>,
    pub trajectory: Option<Trajectory>,
}

pub fn spring_trial(network: &SpringNetwork, cfg: &SpringConfig, trial: u64, record: bool) -> Result<SpringTrial> {
    cfg.validate()?;
    let system = &network.system;
    let (p, d) = (system.masses(), system.space_dim());
    let n = p * d;
    let basis = system.basis();
    let q = basis.len();
    let model = network.model();
    let seed = rng::derive_seed(cfg.seed, trial);
    let mut em = EulerMaruyama::new(&model, &network.rest_state(), cfg.eta, seed)?;
    let burn = (cfg.burn_in / cfg.eta).round() as usize;
    for _ in 0..burn {
        em.step()?;
    }

    let truth = system.adjacency().map(|v| v as i8);
    let mut acc = StatsAccumulator::new(q, n, cfg.eta);
    let mut prev = em.state().to_vec();
    let mut features = vec![0.0; q];
    let mut increment = vec![0.0; n];
    let mut recorded = Vec::new();
    if record {
        recorded.extend_from_slice(&prev);
    }
    let options = LassoOptions::default();
    let mut results = Vec::with_capacity(cfg.t_grid.len());
    for target in checkpoints(&cfg.t_grid, cfg.eta) {
        while acc.len() < target {
            basis.eval(&prev, &mut features)?;
            let next = em.step()?;
            for k in 0..n {
                increment[k] = next[n + k] - prev[n + k];
            }
            acc.push(&features, &increment);
            prev.copy_from_slice(next);
            if record && acc.len().is_multiple_of(cfg.record_stride) {
                recorded.extend_from_slice(&prev);
            }
        }
        let stats = acc.snapshot();
        let lambda = default_lambda(cfg.lambda_scale, q, stats.duration());
        let fit = lasso(&stats, lambda, &options)?;
        let scores = edge_scores(&fit.coefficients, &basis, p, d);
        let tau = cfg.tau.unwrap_or_else(|| pair_gap_threshold(&scores));
        let estimated = scores.map(|v| (v > tau) as i8);
        results.push(RecoveryResult::compare(&estimated, &truth, lambda, tau, stats.duration()));
    }
    let trajectory = if record {
        Some(Trajectory::from_states(cfg.eta * cfg.record_stride as f64, 2 * n, recorded, seed)?)
    } else {
        None
    };
    Ok(SpringTrial { results, trajectory })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpringOutcome {
    pub rows: Vec<PhaseRow>,
    pub springs: usize,
    pub t_star: Option<f64>,
    pub failed_trials: usize,
}

/// Edge-recovery success rate over `cfg.trials` independent paths.
pub fn spring_recovery(cfg: &SpringConfig) -> Result<SpringOutcome> {
    cfg.validate()?;
    let network = mass_spring_network(&cfg.network)?;
    let results = run_trials(cfg.trials, cfg.threads, |t| spring_trial(&network, cfg, t, false));
    let mut successes = vec![0usize; cfg.t_grid.len()];
    let mut failed_trials = 0;
    for r in results {
        match r {
            Ok(trial) => {
                for (s, res) in successes.iter_mut().zip(&trial.results) {
                    *s += res.success as usize;
                }
            }
            Err(e) => {
                log::warn!("spring trial failed: {e}");
                failed_trials += 1;
            }
        }
    }
    let p = network.system.masses();
    let springs = network.springs().len();
    let rows: Vec<PhaseRow> = cfg
        .t_grid
        .iter()
        .zip(successes)
        .map(|(&t, s)| PhaseRow {
            p,
            k_or_density: 2.0 * springs as f64 / p as f64,
            t,
            trials: cfg.trials,
            successes: s,
            success_rate: s as f64 / cfg.trials as f64,
            t_min: f64::NAN,
        })
        .collect();
    Ok(SpringOutcome { t_star: t_star(&rows, 1.0), rows, springs, failed_trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Topology;

    #[test]
    fn true_coefficients_score_as_stiffness() {
        let net = mass_spring_network(&NetworkSpec { topology: Topology::Grid, ..Default::default() }).unwrap();
        let sys = &net.system;
        let n = sys.masses() * sys.space_dim();
        let full = sys.basis_coefficients();
        let velocity_rows = full.rows(n, n).into_owned();
        let scores = edge_scores(&velocity_rows, &sys.basis(), sys.masses(), sys.space_dim());
        for i in 0..sys.masses() {
            for j in 0..sys.masses() {
                let want = if i == j { 0.0 } else { sys.adjacency()[(i, j)] };
                assert!((scores[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn short_trial_runs_and_records() {
        let cfg = SpringConfig {
            record_stride: 40,
            burn_in: 1.0,
            ..SpringConfig::new(NetworkSpec::default(), vec![4.0, 8.0], 1, 3)
        };
        let net = mass_spring_network(&cfg.network).unwrap();
        let trial = spring_trial(&net, &cfg, 0, true).unwrap();
        assert_eq!(trial.results.len(), 2);
        let traj = trial.trajectory.unwrap();
        assert_eq!(traj.n_steps(), 40);
        assert_eq!(traj.dim(), 36);
        assert_eq!(trial.results[0].truth_sign.len(), 9);
    }
}
