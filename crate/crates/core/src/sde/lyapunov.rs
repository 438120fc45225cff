//! Continuous Lyapunov equation `A Σ + Σ A* + I = 0`.

use nalgebra::{Complex, DMatrix};

use super::model::InteractionMatrix;
use crate::linalg;
use crate::{Error, Result};

/// Largest dimension for which `Auto` uses the Kronecker-product solve.
const KRONECKER_MAX_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LyapunovMethod {
    /// Eigen-decomposition for symmetric input, Kronecker for small `p`,
    /// Bartels-Stewart otherwise.
    #[default]
    Auto,
    /// Dense LU solve of the `p² x p²` system `(I ⊗ A + A ⊗ I) vec Σ = -vec I`.
    Kronecker,
    /// Bartels-Stewart on the complex Schur form, with one refinement step.
    Schur,
    /// `Σ = V diag(-1/(2λ)) V*`; requires symmetric `A`.
    SymmetricEigen,
}

/// `max |A Σ + Σ A* + I|`.
pub fn lyapunov_residual(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let r = a * sigma + sigma * a.transpose() + DMatrix::<f64>::identity(n, n);
    linalg::max_abs(&r)
}

/// Solves `A Σ + Σ A* + I = 0` for Hurwitz-stable `A`.
pub fn solve_lyapunov(a: &DMatrix<f64>, method: LyapunovMethod) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::invalid("Lyapunov solve needs a non-empty square matrix"));
    }
    let symmetric = linalg::is_symmetric(a, 0.0);
    let method = match method {
        LyapunovMethod::Auto if symmetric => LyapunovMethod::SymmetricEigen,
        LyapunovMethod::Auto if a.nrows() <= KRONECKER_MAX_DIM => LyapunovMethod::Kronecker,
        LyapunovMethod::Auto => LyapunovMethod::Schur,
        m => m,
    };
    let sigma = match method {
        LyapunovMethod::SymmetricEigen => {
            if !symmetric {
                return Err(Error::invalid("eigen-decomposition route requires a symmetric matrix"));
            }
            solve_symmetric(a)?
        }
        LyapunovMethod::Kronecker => {
            check_hurwitz(&SchurForm::new(a))?;
            solve_kronecker(a)?
        }
        _ => {
            let schur = SchurForm::new(a);
            check_hurwitz(&schur)?;
            let n = a.nrows();
            let mut sigma = schur.solve(&(-DMatrix::<f64>::identity(n, n)));
            let residual = a * &sigma + &sigma * a.transpose() + DMatrix::<f64>::identity(n, n);
            sigma += schur.solve(&(-residual));
            sigma
        }
    };
    Ok(symmetrize(sigma))
}

/// Stationary covariance `Σ∞` of `dx = A x dt + db`.
pub fn stationary_covariance(a: &InteractionMatrix) -> Result<DMatrix<f64>> {
    solve_lyapunov(a.entries(), LyapunovMethod::Auto)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn solve_symmetric(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max < 0.0) {
        return Err(Error::Unstable { max_eigenvalue: max });
    }
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * (-0.5 / eig.eigenvalues[j]));
    Ok(scaled * v.transpose())
}

fn solve_kronecker(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let system = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = nalgebra::DVector::from_iterator(n * n, (-&eye).iter().copied());
    let x = system.lu().solve(&rhs).ok_or(Error::Unstable { max_eigenvalue: 0.0 })?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

fn check_hurwitz(schur: &SchurForm) -> Result<()> {
    let max = schur.max_real_eigenvalue();
    if max < 0.0 {
        Ok(())
    } else {
        Err(Error::Unstable { max_eigenvalue: max })
    }
}

/// `A = Q T Q^H` with `T` upper triangular.
struct SchurForm {
    q: DMatrix<Complex<f64>>,
    t: DMatrix<Complex<f64>>,
}

impl SchurForm {
    fn new(a: &DMatrix<f64>) -> Self {
        let ac = a.map(|x| Complex::new(x, 0.0));
        let (q, t) = nalgebra::linalg::Schur::new(ac).unpack();
        Self { q, t }
    }

    fn max_real_eigenvalue(&self) -> f64 {
        (0..self.t.nrows()).map(|i| self.t[(i, i)].re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Solves `A X + X A* = C` for real `C`.
    fn solve(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.t.nrows();
        let t = &self.t;
        let cc = self.q.adjoint() * c.map(|x| Complex::new(x, 0.0)) * &self.q;
        // T Y + Y T^H = C', solved column by column from the last one.
        let mut y = DMatrix::<Complex<f64>>::zeros(n, n);
        for j in (0..n).rev() {
            let mut rhs: Vec<Complex<f64>> = (0..n).map(|i| cc[(i, j)]).collect();
            for k in j + 1..n {
                let coef = t[(j, k)].conj();
                if coef != Complex::new(0.0, 0.0) {
                    for (i, r) in rhs.iter_mut().enumerate() {
                        *r -= coef * y[(i, k)];
                    }
                }
            }
            let shift = t[(j, j)].conj();
            for i in (0..n).rev() {
                let mut s = rhs[i];
                for l in i + 1..n {
                    s -= t[(i, l)] * y[(l, j)];
                }
                y[(i, j)] = s / (t[(i, i)] + shift);
            }
        }
        (&self.q * y * self.q.adjoint()).map(|z| z.re)
    }
}
