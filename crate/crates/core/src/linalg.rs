//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(A + A*) / 2`.
pub fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// `λ_min(-(A + A*)/2)`, the stability margin of `A`.
pub fn stability_margin(a: &DMatrix<f64>) -> f64 {
    let ev = symmetric_eigenvalues(&symmetric_part(a));
    -ev[ev.len() - 1]
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= tol
}

/// Row-major copy of a matrix, convenient for tight inner loops.
pub fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

pub fn column_vector(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_of_negative_identity() {
        let a = -DMatrix::<f64>::identity(3, 3) * 2.0;
        assert!((stability_margin(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inf_norm_is_max_row_sum() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(inf_norm(&m), 3.0);
    }

    #[test]
    fn ks_of_uniform_grid_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, |x| x.clamp(0.0, 1.0)) <= 0.0005 + 1e-12);
    }
}
