//! Monte-Carlo check of the identity
//!
//! ```text
//! I(X^T; A) = ½ ∫₀ᵀ E Var_{A|X^t}(F(x_t; A)) dt      (x_0 = 0)
//! ```
//!
//! for drifts drawn from a finite prior. Both sides are estimated on the same
//! Euler-discretised paths: the left from log-likelihood ratios against the
//! driftless measure, the right from posterior variances along the path.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::parallel::run_trials;
use crate::sde::{DriftModel, EulerMaruyama, FnBasis, InteractionMatrix, Trajectory};
use crate::{rng, Error, Result};

/// Finitely many candidate drifts with prior probabilities.
#[derive(Debug, Clone)]
pub struct DiscretePrior {
    candidates: Vec<DriftModel>,
    weights: Vec<f64>,
}

impl DiscretePrior {
    pub fn new(candidates: Vec<DriftModel>, weights: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("prior needs at least one candidate"));
        }
        if weights.len() != candidates.len() {
            return Err(Error::DimensionMismatch { expected: candidates.len(), found: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("prior weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("prior weights sum to {total}, not 1")));
        }
        let dim = candidates[0].state_dim();
        if let Some(bad) = candidates.iter().find(|c| c.state_dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.state_dim() });
        }
        Ok(Self { candidates, weights })
    }

    pub fn uniform(candidates: Vec<DriftModel>) -> Result<Self> {
        let n = candidates.len().max(1);
        Self::new(candidates, vec![1.0 / n as f64; n])
    }

    pub fn candidates(&self) -> &[DriftModel] {
        &self.candidates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn state_dim(&self) -> usize {
        self.candidates[0].state_dim()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Constant scalar drifts `F ≡ c` on the real line, equally likely.
pub fn constant_drift_prior(values: &[f64]) -> Result<DiscretePrior> {
    let basis = Arc::new(FnBasis::new(1).with(|_| 1.0));
    let candidates = values
        .iter()
        .map(|&c| DriftModel::basis_linear(DMatrix::from_element(1, 1, c), basis.clone()))
        .collect::<Result<Vec<_>>>()?;
    DiscretePrior::uniform(candidates)
}

/// The four matrices obtained from `base` by flipping the signs of its two
/// off-diagonal entries independently, equally likely.
pub fn sign_flip_prior(base: &DMatrix<f64>) -> Result<DiscretePrior> {
    if base.shape() != (2, 2) {
        return Err(Error::invalid("sign-flip prior needs a 2x2 base matrix"));
    }
    let mut candidates = Vec::with_capacity(4);
    for s in [1.0, -1.0] {
        for t in [1.0, -1.0] {
            let mut a = base.clone();
            a[(0, 1)] *= s;
            a[(1, 0)] *= t;
            candidates.push(DriftModel::linear(InteractionMatrix::new(a)?));
        }
    }
    DiscretePrior::uniform(candidates)
}

fn increment_loglik(f: &[f64], x: &[f64], next: &[f64], eta: f64) -> f64 {
    let mut inner = 0.0;
    let mut norm = 0.0;
    for k in 0..f.len() {
        inner += f[k] * (next[k] - x[k]);
        norm += f[k] * f[k];
    }
    inner - 0.5 * eta * norm
}

/// `Σ_t [⟨F(x_t), Δx_t⟩ − (η/2) ‖F(x_t)‖²]`: log-likelihood ratio of the
/// Euler path measure under `model` against zero drift.
pub fn path_loglik(traj: &Trajectory, model: &DriftModel) -> Result<f64> {
    if traj.dim() != model.state_dim() {
        return Err(Error::DimensionMismatch { expected: model.state_dim(), found: traj.dim() });
    }
    let mut f = vec![0.0; traj.dim()];
    let mut total = 0.0;
    for t in 0..traj.n_steps() {
        let x = traj.state(t);
        model.drift(x, &mut f)?;
        total += increment_loglik(&f, x, traj.state(t + 1), traj.eta());
    }
    Ok(total)
}

/// Normalises `prior · exp(loglik)` in the log domain.
fn normalized_log_weights(log_prior: &[f64], loglik: &[f64], out: &mut [f64]) {
    let mut top = f64::NEG_INFINITY;
    for j in 0..out.len() {
        out[j] = log_prior[j] + loglik[j];
        top = top.max(out[j]);
    }
    let norm = top + out.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
    for v in out.iter_mut() {
        *v -= norm;
    }
}

/// `Σ_i Var_w(F_i)` for candidate drifts `drifts[j]` under weights `w_j = exp(log_w[j])`.
fn posterior_variance(log_w: &[f64], drifts: &[Vec<f64>]) -> f64 {
    let dim = drifts[0].len();
    let mut var = 0.0;
    for i in 0..dim {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (lw, f) in log_w.iter().zip(drifts) {
            let w = lw.exp();
            m1 += w * f[i];
            m2 += w * f[i] * f[i];
        }
        var += (m2 - m1 * m1).max(0.0);
    }
    var
}

/// Posterior over the candidates along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrace {
    pub times: Vec<f64>,
    /// Normalised log posterior weights, one vector per time.
    pub log_weights: Vec<Vec<f64>>,
    /// `Σ_i Var_{A|X^t}(F_i(x_t; A))` at each time.
    pub variance_rate: Vec<f64>,
}

pub fn posterior_trace(traj: &Trajectory, prior: &DiscretePrior) -> Result<PosteriorTrace> {
    let (dim, m) = (prior.state_dim(), prior.len());
    if traj.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: traj.dim() });
    }
    let log_prior: Vec<f64> = prior.weights.iter().map(|w| w.ln()).collect();
    let mut loglik = vec![0.0; m];
    let mut drifts = vec![vec![0.0; dim]; m];
    let mut log_w = vec![0.0; m];
    let n = traj.n_steps();
    let mut trace = PosteriorTrace {
        times: Vec::with_capacity(n + 1),
        log_weights: Vec::with_capacity(n + 1),
        variance_rate: Vec::with_capacity(n + 1),
    };
    for t in 0..=n {
        let x = traj.state(t);
        for (model, f) in prior.candidates.iter().zip(drifts.iter_mut()) {
            model.drift(x, f)?;
        }
        normalized_log_weights(&log_prior, &loglik, &mut log_w);
        trace.times.push(t as f64 * traj.eta());
        trace.log_weights.push(log_w.clone());
        trace.variance_rate.push(posterior_variance(&log_w, &drifts));
        if t < n {
            let next = traj.state(t + 1);
            for (l, f) in loglik.iter_mut().zip(&drifts) {
                *l += increment_loglik(f, x, next, traj.eta());
            }
        }
    }
    Ok(trace)
}

fn default_eta() -> f64 {
    1e-3
}

fn default_rel_tol() -> f64 {
    0.02
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KzzConfig {
    /// Observation horizon.
    pub t: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Relative agreement accepted regardless of the error bars.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl KzzConfig {
    pub fn new(t: f64, n_paths: usize, seed: u64) -> Self {
        Self { t, eta: default_eta(), n_paths, seed, rel_tol: default_rel_tol(), threads: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !(self.eta > 0.0) || self.eta > self.t || self.n_paths < 2 {
            return Err(Error::invalid("need T >= eta > 0 and at least two paths"));
        }
        Ok(())
    }
}

/// Monte-Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { value: mean, se: (var / n).sqrt() }
    }
}

/// Per-path contributions `(direct, kzz)` on a single shared path.
fn path_terms(prior: &DiscretePrior, cfg: &KzzConfig, index: u64) -> Result<(f64, f64)> {
    let (dim, m) = (prior.state_dim(), prior.len());
    let mut r = rng::stream(cfg.seed, index);
    let truth =
        WeightedIndex::new(&prior.weights).map_err(|e| Error::invalid(format!("prior weights: {e}")))?.sample(&mut r);
    let x0 = vec![0.0; dim];
    let mut em = EulerMaruyama::with_rng(&prior.candidates[truth], &x0, cfg.eta, r)?;
    let steps = (cfg.t / cfg.eta).round() as usize;

    let log_prior: Vec<f64> = prior.weights.iter().map(|w| w.ln()).collect();
    let mut loglik = vec![0.0; m];
    let mut drifts = vec![vec![0.0; dim]; m];
    let mut log_w = vec![0.0; m];
    let mut x = x0;
    let mut integral = 0.0;
    for t in 0..=steps {
        for (model, f) in prior.candidates.iter().zip(drifts.iter_mut()) {
            model.drift(&x, f)?;
        }
        normalized_log_weights(&log_prior, &loglik, &mut log_w);
        let rate = posterior_variance(&log_w, &drifts);
        integral += if t == 0 || t == steps { 0.5 * rate } else { rate };
        if t < steps {
            let next = em.step()?;
            for (l, f) in loglik.iter_mut().zip(&drifts) {
                *l += increment_loglik(f, &x, next, cfg.eta);
            }
            x.copy_from_slice(next);
        }
    }
    // log Σ_j π_j exp(ℓ_j) = ℓ_truth + log π_truth − log w_truth
    normalized_log_weights(&log_prior, &loglik, &mut log_w);
    let direct = log_w[truth] - log_prior[truth];
    Ok((direct, 0.5 * cfg.eta * integral))
}

fn shared_estimates(prior: &DiscretePrior, cfg: &KzzConfig) -> Result<(Estimate, Estimate)> {
    cfg.validate()?;
    let terms =
        run_trials(cfg.n_paths, cfg.threads, |i| path_terms(prior, cfg, i)).into_iter().collect::<Result<Vec<_>>>()?;
    let direct: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let kzz: Vec<f64> = terms.iter().map(|t| t.1).collect();
    Ok((Estimate::from_samples(&direct), Estimate::from_samples(&kzz)))
}

/// `E[ℓ(A) − log Σ_j π_j e^{ℓ(A_j)}]` over `A ~ prior` and paths from `x_0 = 0`.
pub fn mi_direct(prior: &DiscretePrior, cfg: &KzzConfig) -> Result<Estimate> {
    Ok(shared_estimates(prior, cfg)?.0)
}

/// `½ ∫ E Var_{A|X^t}(F(x_t; A)) dt` by the trapezoid rule on the step grid.
pub fn mi_kzz(prior: &DiscretePrior, cfg: &KzzConfig) -> Result<Estimate> {
    Ok(shared_estimates(prior, cfg)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KzzReport {
    #[serde(rename = "I_direct")]
    pub i_direct: f64,
    pub se_direct: f64,
    #[serde(rename = "I_kzz")]
    pub i_kzz: f64,
    pub se_kzz: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

/// Both sides of the identity on shared paths; passes when they differ by at
/// most `max(rel_tol · I_direct, 3 combined standard errors)`.
pub fn verify_kzz(prior: &DiscretePrior, cfg: &KzzConfig) -> Result<KzzReport> {
    let (d, k) = shared_estimates(prior, cfg)?;
    let diff = (d.value - k.value).abs();
    let rel_diff = if d.value.abs() > 0.0 {
        diff / d.value.abs()
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let allowed = (cfg.rel_tol * d.value.abs()).max(3.0 * (d.se.powi(2) + k.se.powi(2)).sqrt());
    Ok(KzzReport { i_direct: d.value, se_direct: d.se, i_kzz: k.value, se_kzz: k.se, rel_diff, pass: diff <= allowed })
}

/// Named priors available from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KzzPreset {
    /// Scalar constant drift `±1`.
    ConstantPm1,
    /// Sign flips of the off-diagonals of `[[-1, 0.5], [0.5, -1]]`.
    LinearFlip,
}

impl KzzPreset {
    pub fn prior(self) -> Result<DiscretePrior> {
        match self {
            Self::ConstantPm1 => constant_drift_prior(&[1.0, -1.0]),
            Self::LinearFlip => sign_flip_prior(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, -1.0])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::simulate;

    fn pm1() -> DiscretePrior {
        constant_drift_prior(&[1.0, -1.0]).unwrap()
    }

    #[test]
    fn loglik_of_zero_and_constant_drift() {
        let prior = pm1();
        let traj = simulate(&prior.candidates()[0], &[0.0], 1e-3, 1000, 3).unwrap();
        let zero = constant_drift_prior(&[0.0]).unwrap();
        assert_eq!(path_loglik(&traj, &zero.candidates()[0]).unwrap(), 0.0);
        for (c, model) in [(1.0, &prior.candidates()[0]), (-1.0, &prior.candidates()[1])] {
            let xt = traj.state(1000)[0];
            let want = c * xt - c * c * traj.duration() / 2.0;
            assert!((path_loglik(&traj, model).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_validation() {
        assert!(DiscretePrior::new(vec![], vec![]).is_err());
        let c = pm1().candidates().to_vec();
        assert!(DiscretePrior::new(c.clone(), vec![0.7, 0.7]).is_err());
        assert!(DiscretePrior::new(c.clone(), vec![1.0]).is_err());
        let two_d = KzzPreset::LinearFlip.prior().unwrap().candidates()[0].clone();
        assert!(DiscretePrior::uniform(vec![c[0].clone(), two_d]).is_err());
    }

    #[test]
    fn trace_basics() {
        let prior = pm1();
        let traj = simulate(&prior.candidates()[0], &[0.0], 1e-3, 3000, 8).unwrap();
        let trace = posterior_trace(&traj, &prior).unwrap();
        assert_eq!(trace.log_weights[0], vec![0.5f64.ln(), 0.5f64.ln()]);
        assert_eq!(trace.variance_rate[0], 1.0);
        for lw in &trace.log_weights {
            let total: f64 = lw.iter().map(|v| v.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(trace.variance_rate.iter().all(|v| *v >= 0.0));

        let single = constant_drift_prior(&[1.0]).unwrap();
        let t1 = posterior_trace(&traj, &single).unwrap();
        assert!(t1.variance_rate.iter().all(|v| *v == 0.0));
        assert!(t1.log_weights.iter().all(|w| w[0] == 0.0));
    }

    #[test]
    fn degenerate_priors_carry_no_information() {
        let cfg = KzzConfig::new(0.5, 200, 1);
        let single = constant_drift_prior(&[0.7]).unwrap();
        let r = verify_kzz(&single, &cfg).unwrap();
        assert_eq!((r.i_direct, r.i_kzz), (0.0, 0.0));
        assert!(r.pass);
        let twins = constant_drift_prior(&[0.7, 0.7]).unwrap();
        let r = verify_kzz(&twins, &cfg).unwrap();
        assert!(r.i_direct.abs() < 1e-12 && r.i_kzz.abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn small_horizon_matches_leading_order() {
        let cfg = KzzConfig { eta: 1e-4, ..KzzConfig::new(0.01, 2000, 2) };
        let k = mi_kzz(&pm1(), &cfg).unwrap();
        assert!((k.value / 0.005 - 1.0).abs() < 0.02, "{:?}", k);
    }

    #[test]
    fn threads_do_not_change_results() {
        let cfg = KzzConfig::new(0.3, 64, 5);
        let a = verify_kzz(&pm1(), &cfg).unwrap();
        let b = verify_kzz(&pm1(), &KzzConfig { threads: 3, ..cfg }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_json_keys() {
        let r = verify_kzz(&pm1(), &KzzConfig::new(0.1, 50, 0)).unwrap();
        let v = serde_json::to_value(r).unwrap();
        for key in ["I_direct", "se_direct", "I_kzz", "se_kzz", "rel_diff", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
