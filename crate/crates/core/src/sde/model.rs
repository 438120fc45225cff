use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::mass_spring::MassSpring;
use crate::linalg;
use crate::{Error, Result};

/// Tolerance used when checking a claimed stability margin.
const MARGIN_TOL: f64 = 1e-9;

/// A square real drift matrix, optionally tagged with a verified stability
/// margin `ρ ≤ λ_min(-(A + A*)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    entries: DMatrix<f64>,
    rho: Option<f64>,
}

impl InteractionMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::invalid(format!(
                "interaction matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interaction matrix entry".into()));
        }
        Ok(Self { entries, rho: None })
    }

    /// Builds the matrix and checks `λ_min(-(A + A*)/2) ≥ rho`.
    pub fn with_margin(entries: DMatrix<f64>, rho: f64) -> Result<Self> {
        let mut m = Self::new(entries)?;
        if !(rho >= 0.0) {
            return Err(Error::invalid(format!("stability margin must be >= 0, got {rho}")));
        }
        let margin = m.margin();
        if margin < rho - MARGIN_TOL {
            return Err(Error::invalid(format!("claimed stability margin {rho} exceeds actual margin {margin}")));
        }
        m.rho = Some(rho);
        Ok(m)
    }

    /// Attaches a margin the caller has already established exactly.
    pub(crate) fn with_known_margin(entries: DMatrix<f64>, rho: f64) -> Result<Self> {
        let mut m = Self::new(entries)?;
        m.rho = Some(rho);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    /// `λ_min(-(A + A*)/2)`, computed by a symmetric eigensolve.
    pub fn margin(&self) -> f64 {
        linalg::stability_margin(&self.entries)
    }

    pub fn is_symmetric(&self) -> bool {
        linalg::is_symmetric(&self.entries, 0.0)
    }
}

/// A finite family of scalar functions `f_1..f_m` of the state.
pub trait Basis: Send + Sync + fmt::Debug {
    /// Dimension of the state the functions act on.
    fn state_dim(&self) -> usize;

    /// Number of functions `m`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes `[f_1(x), ..., f_m(x)]` into `out`.
    fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Basis made of arbitrary closures.
#[derive(Clone)]
pub struct FnBasis {
    state_dim: usize,
    functions: Vec<Arc<ScalarFn>>,
}

impl FnBasis {
    pub fn new(state_dim: usize) -> Self {
        Self { state_dim, functions: Vec::new() }
    }

    pub fn with(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.functions.push(Arc::new(f));
        self
    }
}

impl fmt::Debug for FnBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnBasis").field("state_dim", &self.state_dim).field("len", &self.functions.len()).finish()
    }
}

impl Basis for FnBasis {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn len(&self) -> usize {
        self.functions.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, f) in out.iter_mut().zip(&self.functions) {
            *o = f(x);
            if !o.is_finite() {
                return Err(Error::NonFinite("basis function value".into()));
            }
        }
        Ok(())
    }
}

/// Drift coefficient `F(x; A)` of `dx = F(x; A) dt + db`.
#[derive(Debug, Clone)]
pub enum DriftModel {
    /// `F(x) = A x`.
    Linear(InteractionMatrix),
    /// `F(x) = A [f_1(x), ..., f_m(x)]` with `A` of shape `p x m`.
    BasisLinear { coefficients: DMatrix<f64>, basis: Arc<dyn Basis> },
    /// Damped unit masses joined by unit springs; noise drives velocities only.
    MassSpring(MassSpring),
}

impl DriftModel {
    pub fn linear(a: InteractionMatrix) -> Self {
        DriftModel::Linear(a)
    }

    pub fn basis_linear(coefficients: DMatrix<f64>, basis: Arc<dyn Basis>) -> Result<Self> {
        if coefficients.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: coefficients.ncols() });
        }
        if coefficients.nrows() != basis.state_dim() {
            return Err(Error::DimensionMismatch { expected: basis.state_dim(), found: coefficients.nrows() });
        }
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("basis coefficient".into()));
        }
        Ok(DriftModel::BasisLinear { coefficients, basis })
    }

    pub fn state_dim(&self) -> usize {
        match self {
            DriftModel::Linear(a) => a.dim(),
            DriftModel::BasisLinear { coefficients, .. } => coefficients.nrows(),
            DriftModel::MassSpring(ms) => ms.state_dim(),
        }
    }

    /// Evaluates `F(x)` into `out`.
    pub fn drift(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.state_dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
        }
        if out.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: out.len() });
        }
        match self {
            DriftModel::Linear(a) => {
                let a = a.entries();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..dim).map(|j| a[(i, j)] * x[j]).sum();
                }
            }
            DriftModel::BasisLinear { coefficients, basis } => {
                let mut f = vec![0.0; basis.len()];
                basis.eval(x, &mut f)?;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = coefficients.row(i).iter().zip(&f).map(|(c, v)| c * v).sum();
                }
            }
            DriftModel::MassSpring(ms) => ms.drift(x, out)?,
        }
        Ok(())
    }

    pub fn drift_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.state_dim()];
        self.drift(x, &mut out)?;
        Ok(out)
    }

    /// Diffusion amplitude per state coordinate.
    pub fn noise_scales(&self) -> Vec<f64> {
        match self {
            DriftModel::MassSpring(ms) => {
                let half = ms.state_dim() / 2;
                (0..ms.state_dim()).map(|i| if i < half { 0.0 } else { ms.sigma() }).collect()
            }
            _ => vec![1.0; self.state_dim()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(InteractionMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(InteractionMatrix::new(m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn margin_claim_is_checked() {
        let a = -DMatrix::<f64>::identity(3, 3);
        assert!(InteractionMatrix::with_margin(a.clone(), 1.0).is_ok());
        assert!(InteractionMatrix::with_margin(a, 1.5).is_err());
    }

    #[test]
    fn basis_linear_checks_shapes() {
        let basis = Arc::new(FnBasis::new(1).with(|x| x[0]).with(|x| x[0].powi(3)));
        assert!(DriftModel::basis_linear(DMatrix::from_row_slice(1, 2, &[-1.0, -0.5]), basis.clone()).is_ok());
        assert!(DriftModel::basis_linear(DMatrix::from_row_slice(1, 1, &[-1.0]), basis).is_err());
    }

    #[test]
    fn basis_linear_drift() {
        let basis = Arc::new(FnBasis::new(1).with(|x| x[0]).with(|x| x[0].powi(3)));
        let m = DriftModel::basis_linear(DMatrix::from_row_slice(1, 2, &[-1.0, -0.5]), basis).unwrap();
        assert_eq!(m.drift_vec(&[2.0]).unwrap(), vec![-2.0 - 4.0]);
    }
}
