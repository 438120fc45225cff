use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::graph::signed_from_rng;
use crate::linalg::symmetric_eigenvalues;
use crate::sde::InteractionMatrix;
use crate::{rng, Error, Result};

/// Smallest diagonal shift handed out, so the shift stays strictly positive.
pub const SHIFT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseEnsembleSpec {
    pub p: usize,
    pub k: usize,
    pub a_min: f64,
    pub rho: f64,
}

impl SparseEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 3 || self.k >= self.p {
            return Err(Error::invalid(format!("need 3 <= k < p, got p={}, k={}", self.p, self.k)));
        }
        if !(self.p * self.k).is_multiple_of(2) {
            return Err(Error::Infeasible(format!("p·k must be even, got p={}, k={}", self.p, self.k)));
        }
        check_positive("a_min", self.a_min)?;
        check_positive("rho", self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseEnsembleSpec {
    pub p: usize,
    pub a_min: f64,
    pub rho: f64,
}

impl DenseEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::invalid(format!("need p >= 2, got {}", self.p)));
        }
        check_positive("a_min", self.a_min)?;
        check_positive("rho", self.rho)
    }

    /// Second moment `a_min²/2` of the unscaled entries.
    pub fn alpha(&self) -> f64 {
        0.5 * self.a_min * self.a_min
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Shift `γ` making `-(γ + 2 a_min √(k-1)) I + a_min Ã` have margin exactly `rho`
/// (or `SHIFT_FLOOR` if the raw value is smaller).
pub fn sparse_shift(signed: &DMatrix<f64>, k: usize, a_min: f64, rho: f64) -> f64 {
    let top = *symmetric_eigenvalues(signed).last().expect("non-empty");
    (a_min * top - 2.0 * a_min * ((k - 1) as f64).sqrt() + rho).max(SHIFT_FLOOR)
}

/// Shift `γ` making `-(γ + 2√α) I + Ã/√p` have margin exactly `rho`.
pub fn dense_shift(scaled: &DMatrix<f64>, alpha: f64, rho: f64) -> f64 {
    let top = *symmetric_eigenvalues(scaled).last().expect("non-empty");
    (top - 2.0 * alpha.sqrt() + rho).max(SHIFT_FLOOR)
}

/// `A = -(γ + 2 a_min √(k-1)) I + a_min Ã` with `Ã` from
/// [`random_regular_signed`](super::random_regular_signed).
pub fn sparse_ensemble_sample(spec: &SparseEnsembleSpec, seed: u64) -> Result<InteractionMatrix> {
    spec.validate()?;
    let mut r = rng::from_seed(seed);
    let signed = signed_from_rng(spec.p, spec.k, &mut r)?;
    let gamma = sparse_shift(&signed, spec.k, spec.a_min, spec.rho);
    let diag = gamma + 2.0 * spec.a_min * ((spec.k - 1) as f64).sqrt();
    let mut a = signed * spec.a_min;
    for i in 0..spec.p {
        a[(i, i)] = -diag;
    }
    // the shift fixes λ_max(A) = -rho up to rounding in the eigensolve
    InteractionMatrix::with_known_margin(a, spec.rho)
}

/// `A = -(γ + 2√α) I + Ã/√p` where the upper triangle of `Ã` (diagonal
/// included) is i.i.d. `±a_min` with probability 1/4 each and 0 otherwise.
pub fn dense_ensemble_sample(spec: &DenseEnsembleSpec, seed: u64) -> Result<InteractionMatrix> {
    spec.validate()?;
    let p = spec.p;
    let mut r = rng::from_seed(seed);
    let scale = spec.a_min / (p as f64).sqrt();
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = match r.random_range(0..4u8) {
                0 => scale,
                1 => -scale,
                _ => 0.0,
            };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let gamma = dense_shift(&a, spec.alpha(), spec.rho);
    let diag = gamma + 2.0 * spec.alpha().sqrt();
    for i in 0..p {
        a[(i, i)] -= diag;
    }
    InteractionMatrix::with_known_margin(a, spec.rho)
}

/// Sparse class check on the off-diagonal part: at most `k` nonzeros per row,
/// each of magnitude at least `a_min`, and margin at least `rho`.
pub fn in_sparse_class(a: &DMatrix<f64>, k: usize, a_min: f64, rho: f64, tol: f64) -> bool {
    let p = a.nrows();
    for i in 0..p {
        let mut count = 0;
        for j in (0..p).filter(|&j| j != i) {
            let v = a[(i, j)];
            if v != 0.0 {
                count += 1;
                if v.abs() < a_min - tol {
                    return false;
                }
            }
        }
        if count > k {
            return false;
        }
    }
    crate::linalg::stability_margin(a) >= rho - tol
}

/// Dense class check: every nonzero off-diagonal entry has `|A_ij|√p` in
/// `[a_min, a_max]`, and the margin is at least `rho`.
pub fn in_dense_class(a: &DMatrix<f64>, a_min: f64, a_max: f64, rho: f64, tol: f64) -> bool {
    let p = a.nrows();
    let sp = (p as f64).sqrt();
    for i in 0..p {
        for j in (0..p).filter(|&j| j != i) {
            let m = a[(i, j)].abs() * sp;
            if m != 0.0 && (m < a_min - tol || m > a_max + tol) {
                return false;
            }
        }
    }
    crate::linalg::stability_margin(a) >= rho - tol
}

/// Finite-`p` variance rate `(1/p){Tr(-A) - p / Tr((-A)^{-1})}` of a
/// symmetric stable matrix.
pub fn empirical_variance_rate(a: &DMatrix<f64>) -> Result<f64> {
    let p = a.nrows() as f64;
    let ev = symmetric_eigenvalues(&crate::linalg::symmetric_part(a));
    if ev.last().is_none_or(|&top| top >= 0.0) {
        return Err(Error::Unstable { max_eigenvalue: ev.last().copied().unwrap_or(f64::NAN) });
    }
    let trace: f64 = -ev.iter().sum::<f64>();
    let inv_trace: f64 = ev.iter().map(|&l| -1.0 / l).sum();
    Ok((trace - p * p / inv_trace) / p)
}
