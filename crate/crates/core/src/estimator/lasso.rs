//! Cyclic coordinate descent for
//!
//! ```text
//! min_a  (1/(2 n η²)) Σ_t (Δx_t,i − η ⟨a, f_t⟩)² + λ ‖a‖₁
//!      = ½ aᵀ G a − aᵀ c_i + λ ‖a‖₁ + const,
//! ```
//!
//! with `G = (1/n) Σ f fᵀ` and `c = (1/(nη)) Σ f Δxᵀ`. The penalty is in drift
//! units, so a given `λ` means the same thing for any step size.

use nalgebra::{DMatrix, DVector};

use super::regression::{RegressionData, SufficientStats};
use crate::{Error, Result};

/// Multiplier `c` in the default penalty `λ = c √(log q / T)`.
pub const DEFAULT_LAMBDA_SCALE: f64 = 0.1;

/// `c √(log q / T)`, with `q` the number of features and `T` the observation time.
pub fn default_lambda(scale: f64, n_features: usize, duration: f64) -> f64 {
    scale * ((n_features.max(2) as f64).ln() / duration).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Stop once no coordinate moves by more than this in a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Number of points on the geometric warm-start path from `λ_max` down.
    pub path_len: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_sweeps: 10_000, path_len: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// One row per target, one column per feature.
    pub coefficients: DMatrix<f64>,
    pub lambda: f64,
    /// Total coordinate sweeps over all rows and path points.
    pub sweeps: usize,
}

/// Solves every row of the problem at penalty `lambda`.
pub fn lasso(stats: &SufficientStats, lambda: f64, options: &LassoOptions) -> Result<LassoFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if stats.n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {}", stats.n)));
    }
    let g = stats.normalized_gram();
    let c = stats.normalized_cross();
    if g.iter().chain(c.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression statistics".into()));
    }
    let q = g.nrows();
    let mut coefficients = DMatrix::zeros(c.ncols(), q);
    let mut sweeps = 0;
    for i in 0..c.ncols() {
        let ci = c.column(i).into_owned();
        let mut a = DVector::zeros(q);
        let lambda_max = ci.amax();
        let points = options.path_len.max(1);
        for s in 1..=points {
            let level = if lambda >= lambda_max || s == points {
                lambda
            } else {
                lambda_max * (lambda.max(1e-3 * lambda_max) / lambda_max).powf(s as f64 / points as f64)
            };
            sweeps += coordinate_descent(&g, &ci, level, &mut a, options)?;
            if level == lambda {
                break;
            }
        }
        coefficients.row_mut(i).copy_from(&a.transpose());
    }
    Ok(LassoFit { coefficients, lambda, sweeps })
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Runs sweeps from the warm start `a`; returns the number of sweeps.
fn coordinate_descent(
    g: &DMatrix<f64>,
    c: &DVector<f64>,
    lambda: f64,
    a: &mut DVector<f64>,
    options: &LassoOptions,
) -> Result<usize> {
    let q = g.nrows();
    // r = c − G a
    let mut r = c - g * &*a;
    let mut last = f64::INFINITY;
    for sweep in 1..=options.max_sweeps {
        let mut largest = 0.0_f64;
        for j in 0..q {
            let gjj = g[(j, j)];
            if gjj <= 0.0 {
                a[j] = 0.0;
                continue;
            }
            let old = a[j];
            let new = soft_threshold(r[j] + gjj * old, lambda) / gjj;
            let delta = new - old;
            if delta != 0.0 {
                a[j] = new;
                r.axpy(-delta, &g.column(j), 1.0);
                largest = largest.max(delta.abs());
            }
        }
        last = largest;
        if largest < options.tolerance {
            return Ok(sweep);
        }
    }
    Err(Error::NotConverged { iterations: options.max_sweeps, last_update: last })
}

/// ℓ1-penalised drift estimate from an explicit design.
pub fn l1_drift_estimate(data: &RegressionData, lambda: f64) -> Result<DMatrix<f64>> {
    Ok(lasso(&data.stats(), lambda, &LassoOptions::default())?.coefficients)
}

/// Largest violation of the optimality conditions over all rows:
/// `|∇_j| ≤ λ` where `a_j = 0`, and `∇_j = −λ sign(a_j)` elsewhere.
pub fn kkt_violation(stats: &SufficientStats, coefficients: &DMatrix<f64>, lambda: f64) -> f64 {
    let g = stats.normalized_gram();
    let c = stats.normalized_cross();
    let mut worst = 0.0_f64;
    for i in 0..coefficients.nrows() {
        let a = coefficients.row(i).transpose();
        let grad = &g * &a - c.column(i);
        for j in 0..a.len() {
            let v =
                if a[j] == 0.0 { (grad[j].abs() - lambda).max(0.0) } else { (grad[j] + lambda * a[j].signum()).abs() };
            worst = worst.max(v);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::build_regression;
    use crate::sde::{simulate, DriftModel, InteractionMatrix};

    fn two_dim_data(seed: u64, n: usize) -> RegressionData {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
        let model = DriftModel::linear(InteractionMatrix::new(a).unwrap());
        build_regression(&simulate(&model, &[0.3, -0.2], 0.01, n, seed).unwrap(), None).unwrap()
    }

    #[test]
    fn huge_lambda_gives_zero() {
        let data = two_dim_data(1, 5000);
        let stats = data.stats();
        let lmax = stats.normalized_cross().amax();
        let fit = lasso(&stats, lmax * 1.0001, &LassoOptions::default()).unwrap();
        assert!(fit.coefficients.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_lambda_is_least_squares() {
        let data = two_dim_data(2, 20_000);
        let est = l1_drift_estimate(&data, 0.0).unwrap();
        let x = &data.features;
        let ls = (x.tr_mul(x)).try_inverse().unwrap() * x.tr_mul(&data.targets) / data.eta;
        assert!((est - ls.transpose()).amax() < 1e-6);
    }

    #[test]
    fn kkt_holds_at_convergence() {
        let data = two_dim_data(3, 20_000);
        let stats = data.stats();
        for lambda in [0.0, 0.05, 0.3, 1.0] {
            let fit = lasso(&stats, lambda, &LassoOptions::default()).unwrap();
            assert!(kkt_violation(&stats, &fit.coefficients, lambda) < 1e-6, "lambda {lambda}");
        }
    }

    #[test]
    fn iteration_budget_is_reported() {
        let data = two_dim_data(4, 2000);
        let options = LassoOptions { max_sweeps: 1, tolerance: 0.0, path_len: 1 };
        assert!(matches!(lasso(&data.stats(), 0.0, &options), Err(Error::NotConverged { .. })));
        assert!(lasso(&data.stats(), -1.0, &LassoOptions::default()).is_err());
    }

    #[test]
    fn default_lambda_shape() {
        assert!((default_lambda(1.0, 100, 100.0) - (100f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!(default_lambda(1.0, 10, 400.0) < default_lambda(1.0, 10, 100.0));
    }
}
