use serde::{Deserialize, Serialize};

use super::spectral::{q_dense, q_sparse};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sparse,
    Dense,
    Nonlinear,
    Generic,
}

/// Per-dimension terms of an information-theoretic lower bound on the
/// observation time, and the resulting `t_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub entropy_per_p: f64,
    /// Upper bound on the information the initial state carries about the drift.
    pub mi_x0_per_p: f64,
    pub variance_rate_per_p: f64,
    pub t_min: f64,
}

impl BoundReport {
    /// True when `entropy - 2 mi` is not positive, so the bound says nothing.
    pub fn is_vacuous(&self) -> bool {
        self.entropy_per_p - 2.0 * self.mi_x0_per_p <= 0.0
    }

    fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }
}

/// `t_min = max(0, (entropy - 2 mi_x0) / variance_rate)`.
pub fn general_bound(entropy: f64, mi_x0: f64, variance_rate: f64) -> Result<BoundReport> {
    if !(variance_rate > 0.0) || !variance_rate.is_finite() {
        return Err(Error::invalid(format!("variance rate must be positive, got {variance_rate}")));
    }
    if !entropy.is_finite() || !mi_x0.is_finite() {
        return Err(Error::NonFinite("bound terms".into()));
    }
    Ok(BoundReport {
        regime: Regime::Generic,
        entropy_per_p: entropy,
        mi_x0_per_p: mi_x0,
        variance_rate_per_p: variance_rate,
        t_min: ((entropy - 2.0 * mi_x0) / variance_rate).max(0.0),
    })
}

/// Bound for drifts drawn from the sparse ensemble (signed random `k`-regular
/// off-diagonal, diagonal shifted to a margin `rho`).
pub fn lower_bound_sparse(p: usize, k: usize, a_min: f64, rho: f64) -> Result<BoundReport> {
    if k < 3 || p <= k {
        return Err(Error::invalid(format!("need p > k >= 3, got p={p}, k={k}")));
    }
    let entropy = k as f64 * (2.0 * p as f64 / k as f64).ln();
    let rate = q_sparse(a_min, k, rho)?;
    Ok(general_bound(entropy, 1.0, rate)?.with_regime(Regime::Sparse))
}

/// Bound for drifts drawn from the dense ensemble (symmetric `±a_min/√p`
/// entries, diagonal shifted to a margin `rho`).
pub fn lower_bound_dense(p: usize, a_min: f64, rho: f64) -> Result<BoundReport> {
    if p < 2 {
        return Err(Error::invalid(format!("need p >= 2, got {p}")));
    }
    let entropy = (1.0 + p as f64) / 4.0 * 4.0_f64.ln();
    let rate = q_dense(a_min, rho)?;
    Ok(general_bound(entropy, 1.0, rate)?.with_regime(Regime::Dense))
}

/// Parameters of a nonlinear drift class with `k`-sparse dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearClassParams {
    pub p: usize,
    pub k: usize,
    /// Bound on the per-coordinate stationary variance.
    pub b: f64,
    /// Floor on the stationary covariance eigenvalues.
    pub l: f64,
    /// Lipschitz bound on the drift partials.
    pub d: f64,
    /// Bound on the drift evaluated at the mean.
    pub c: f64,
}

impl NonlinearClassParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.p <= self.k {
            return Err(Error::invalid(format!("need p > k >= 1, got p={}, k={}", self.p, self.k)));
        }
        if !(self.b > 0.0 && self.l > 0.0) {
            return Err(Error::invalid("B and L must be positive"));
        }
        if !(self.d >= 0.0) || !(self.c >= 0.0) {
            return Err(Error::invalid("D and C must be nonnegative"));
        }
        Ok(())
    }
}

/// `t_min = (k log(p/k) - log(B/L)) / (C + 2 k² D² B)`.
pub fn lower_bound_nonlinear(params: &NonlinearClassParams) -> Result<BoundReport> {
    params.validate()?;
    let k = params.k as f64;
    let entropy = k * (params.p as f64 / k).ln();
    let mi = 0.5 * (params.b / params.l).ln();
    let rate = params.c + 2.0 * k * k * params.d * params.d * params.b;
    Ok(general_bound(entropy, mi, rate)?.with_regime(Regime::Nonlinear))
}
