//! Kesten-McKay and semicircle laws, their Stieltjes transforms, and the
//! variance-rate functions built from them.

use std::f64::consts::PI;

use super::quadrature;
use crate::{Error, Result};

fn check_degree(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::invalid(format!("degree k must be >= 3, got {k}")));
    }
    Ok(())
}

/// Right edge `2√(k-1)` of the Kesten-McKay support.
pub fn kesten_mckay_edge(k: usize) -> f64 {
    2.0 * ((k - 1) as f64).sqrt()
}

/// Kesten-McKay density `(k/2π) √(4(k-1) - ν²) / (k² - ν²)` on `|ν| ≤ 2√(k-1)`.
pub fn kesten_mckay_pdf(nu: f64, k: usize) -> f64 {
    let kf = k as f64;
    let inner = 4.0 * (kf - 1.0) - nu * nu;
    if inner <= 0.0 {
        return 0.0;
    }
    kf / (2.0 * PI) * inner.sqrt() / (kf * kf - nu * nu)
}

/// Distribution function of the Kesten-McKay law, by quadrature.
pub fn kesten_mckay_cdf(x: f64, k: usize) -> f64 {
    let e = kesten_mckay_edge(k);
    if x <= -e {
        return 0.0;
    }
    if x >= e {
        return 1.0;
    }
    let kf = k as f64;
    let upper = (x / e).asin();
    // ν = e sin θ turns √(e² - ν²) dν into e² cos² θ dθ
    quadrature::integrate(
        |theta| {
            let (s, c) = theta.sin_cos();
            let nu = e * s;
            kf / (2.0 * PI) * e * e * c * c / (kf * kf - nu * nu)
        },
        -PI / 2.0,
        upper,
        1e-12,
    )
    .map(|v| v.clamp(0.0, 1.0))
    .unwrap_or(f64::NAN)
}

/// Stieltjes transform `G(k, z) = ∫ dμ(ν) / (z - ν)` of the Kesten-McKay law
/// on the real branch `z ≥ 2√(k-1)`.
///
/// Evaluated as `2(k-1) / ((k-2) z + k √(z² - 4k + 4))`, the rationalised form
/// of `-((k-2) z - k √(z² - 4k + 4)) / (2 (z² - k²))`; it is finite at `z = k`.
pub fn stieltjes_g(k: usize, z: f64) -> Result<f64> {
    check_degree(k)?;
    let edge = kesten_mckay_edge(k);
    if !(z >= edge) {
        return Err(Error::InsideSupport { z, edge });
    }
    let kf = k as f64;
    Ok(2.0 * (kf - 1.0) / ((kf - 2.0) * z + kf * edge_distance(k, z)))
}

/// `√(z² - 4k + 4)`, snapped to zero when `z` is within rounding of the edge.
fn edge_distance(k: usize, z: f64) -> f64 {
    let d = z * z - 4.0 * (k as f64 - 1.0);
    if d <= 8.0 * f64::EPSILON * z * z {
        0.0
    } else {
        d.sqrt()
    }
}

/// Semicircle density with variance `alpha` (radius `2√α`).
pub fn semicircle_pdf(nu: f64, alpha: f64) -> f64 {
    let inner = 4.0 * alpha - nu * nu;
    if inner <= 0.0 {
        return 0.0;
    }
    inner.sqrt() / (2.0 * PI * alpha)
}

pub fn semicircle_cdf(x: f64, alpha: f64) -> f64 {
    let r = 2.0 * alpha.sqrt();
    if x <= -r {
        return 0.0;
    }
    if x >= r {
        return 1.0;
    }
    0.5 + x * (r * r - x * x).sqrt() / (PI * r * r) + (x / r).asin() / PI
}

/// `C(α, ρ)`: limiting `(1/p) Tr (-A)^{-1}` for the dense ensemble, i.e. the
/// semicircle Stieltjes transform at `z = 2√α + ρ`.
///
/// Evaluated as `2 / (z + √(ρ (4√α + ρ)))`, equal to
/// `(2√α + ρ - √(ρ (4√α + ρ))) / (2α)`.
pub fn c_dense(alpha: f64, rho: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(rho >= 0.0) {
        return Err(Error::invalid(format!("need alpha > 0 and rho >= 0, got ({alpha}, {rho})")));
    }
    let z = 2.0 * alpha.sqrt() + rho;
    Ok(2.0 / (z + (rho * (4.0 * alpha.sqrt() + rho)).sqrt()))
}

fn check_coupling(a_min: f64, rho: f64) -> Result<()> {
    if !(a_min > 0.0) || !a_min.is_finite() {
        return Err(Error::invalid(format!("a_min must be > 0, got {a_min}")));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::invalid(format!("rho must be >= 0, got {rho}")));
    }
    Ok(())
}

/// Variance rate per dimension for the sparse ensemble:
/// `ρ + 2 a_min √(k-1) - a_min / G(k, z)` with `z = ρ/a_min + 2√(k-1)`.
///
/// Computed as `2 k a_min / (z + √(z² - 4k + 4))`, which avoids the
/// cancellation between the two leading terms for large `ρ`.
pub fn q_sparse(a_min: f64, k: usize, rho: f64) -> Result<f64> {
    check_degree(k)?;
    check_coupling(a_min, rho)?;
    let z = rho / a_min + kesten_mckay_edge(k);
    Ok(2.0 * k as f64 * a_min / (z + edge_distance(k, z)))
}

/// Variance rate per dimension for the dense ensemble:
/// `ρ + 2√α - 1/C(α, ρ)` with `α = a_min²/2`.
///
/// Computed as `2α / (z + √(ρ (4√α + ρ)))`, `z = 2√α + ρ`.
pub fn q_dense(a_min: f64, rho: f64) -> Result<f64> {
    check_coupling(a_min, rho)?;
    let alpha = 0.5 * a_min * a_min;
    let z = 2.0 * alpha.sqrt() + rho;
    Ok(2.0 * alpha / (z + (rho * (4.0 * alpha.sqrt() + rho)).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MiChainReport {
    pub k: usize,
    /// Largest `2√(z G(k, z))` on the grid.
    pub supremum: f64,
    /// Location of the supremum.
    pub argmax: f64,
    /// `√8 √((k-1)/(k-2))`.
    pub bound: f64,
}

impl MiChainReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.supremum <= self.bound + tol
    }
}

/// Grid supremum of `2√(z G(k, z))` over `z ≥ 2√(k-1)`.
///
/// The grid holds the edge `2√(k-1)` itself followed by 1000 log-spaced
/// points on `[2√(k-1)(1 + 1e-9), 1e3]`.
pub fn mi_chain_check(k: usize) -> Result<MiChainReport> {
    check_degree(k)?;
    let edge = kesten_mckay_edge(k);
    let lo = edge * (1.0 + 1e-9);
    let hi = 1e3_f64.max(lo * 2.0);
    let n = 1000;
    let grid = std::iter::once(edge).chain((0..n).map(|i| {
        let t = i as f64 / (n - 1) as f64;
        (lo.ln() + t * (hi.ln() - lo.ln())).exp()
    }));
    let mut best = (f64::NEG_INFINITY, edge);
    for z in grid {
        let v = 2.0 * (z * stieltjes_g(k, z)?).sqrt();
        if v > best.0 {
            best = (v, z);
        }
    }
    let kf = k as f64;
    Ok(MiChainReport { k, supremum: best.0, argmax: best.1, bound: 8.0_f64.sqrt() * ((kf - 1.0) / (kf - 2.0)).sqrt() })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    /// Quadrature oracle for the Stieltjes transform, independent of the closed form.
    fn stieltjes_by_quadrature(k: usize, z: f64) -> f64 {
        let kf = k as f64;
        let e = kesten_mckay_edge(k);
        let at_edge = z == e;
        quadrature::integrate(
            |theta| {
                let (s, c) = theta.sin_cos();
                let nu = e * s;
                // at the edge cos²θ / (e - e sinθ) = (1 + sinθ) / e
                let kernel = if at_edge { e * (1.0 + s) } else { e * e * c * c / (z - nu) };
                kf / (2.0 * PI) * kernel / (kf * kf - nu * nu)
            },
            -PI / 2.0,
            PI / 2.0,
            1e-13,
        )
        .unwrap()
    }

    #[test]
    fn kesten_mckay_values() {
        assert_eq!(kesten_mckay_pdf(kesten_mckay_edge(3), 3), 0.0);
        assert_eq!(kesten_mckay_pdf(-kesten_mckay_edge(5), 5), 0.0);
        // √2/(3π), frozen from high-precision evaluation
        assert_relative_eq!(kesten_mckay_pdf(0.0, 3), 0.150_052_719_359_517_7, epsilon = 1e-15);
        for k in 3..=10 {
            let mass = quadrature::integrate_semicircular(
                |nu| k as f64 / (2.0 * PI) / ((k * k) as f64 - nu * nu),
                kesten_mckay_edge(k),
                1e-12,
            )
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "k={k}: {mass}");
            assert!((kesten_mckay_cdf(kesten_mckay_edge(k) * 0.999_999_9, k) - 1.0).abs() < 1e-6);
        }
        assert_relative_eq!(kesten_mckay_cdf(0.0, 4), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn stieltjes_examples() {
        // frozen from mpmath quadrature of the density against 1/(z-ν)
        assert_relative_eq!(stieltjes_g(3, 4.0).unwrap(), 0.320_377_241_017_040_7, epsilon = 1e-12);
        assert_relative_eq!(stieltjes_g(3, 8.0_f64.sqrt()).unwrap(), 2.0_f64.sqrt(), epsilon = 1e-12);
        for k in 3..8 {
            let e = kesten_mckay_edge(k);
            let closed = ((k - 1) as f64).sqrt() / (k - 2) as f64;
            assert_relative_eq!(stieltjes_g(k, e).unwrap(), closed, epsilon = 1e-12);
        }
        let z = 1e4;
        assert!((z * stieltjes_g(3, z).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn stieltjes_matches_quadrature_including_z_equal_k() {
        for k in [3, 4, 7] {
            let e = kesten_mckay_edge(k);
            for z in [e, e + 1e-3, k as f64, e + 1.0, 10.0, 50.0] {
                let diff = (stieltjes_g(k, z).unwrap() - stieltjes_by_quadrature(k, z)).abs();
                assert!(diff < 1e-8, "k={k} z={z}: {diff}");
            }
        }
    }

    #[test]
    fn stieltjes_rejects_inside_support() {
        assert!(matches!(stieltjes_g(3, 2.0), Err(Error::InsideSupport { .. })));
        assert!(stieltjes_g(2, 5.0).is_err());
    }

    #[test]
    fn c_dense_values() {
        assert_relative_eq!(c_dense(1.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c_dense(1.0, 1.0).unwrap(), (3.0 - 5.0_f64.sqrt()) / 2.0, epsilon = 1e-15);
        // semicircle quadrature oracle
        for (alpha, rho) in [(0.5, 0.5), (1.0, 1.0), (2.0, 0.1)] {
            let z = 2.0 * f64::sqrt(alpha) + rho;
            let r = 2.0 * f64::sqrt(alpha);
            let q = quadrature::integrate_semicircular(|nu| 1.0 / (2.0 * PI * alpha) / (z - nu), r, 1e-12).unwrap();
            assert!((q - c_dense(alpha, rho).unwrap()).abs() < 1e-9);
        }
        assert_relative_eq!(c_dense(0.5, 0.5).unwrap(), 0.624_169_546_700_337_1, epsilon = 1e-12);
    }

    #[test]
    fn c_dense_scaling_identity_on_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let alpha = 0.05 * 1.6_f64.powi(i);
                let rho = 1e-3 * 3.0_f64.powi(j);
                let lhs = c_dense(alpha, rho).unwrap();
                let rhs = c_dense(1.0, rho / alpha.sqrt()).unwrap() / alpha.sqrt();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0), "{alpha} {rho}");
            }
        }
    }

    #[test]
    fn q_sparse_limits() {
        assert_relative_eq!(q_sparse(1.0, 3, 1e-9).unwrap(), 3.0 / 2.0_f64.sqrt(), epsilon = 1e-4);
        let rho = 1e6;
        assert!((rho * q_sparse(1.0, 3, rho).unwrap() / 3.0 - 1.0).abs() < 1e-2);
        // agrees with the textbook form ρ + 2a√(k-1) - a/G away from cancellation
        let (a, k, rho) = (1.3, 4, 0.7);
        let g = stieltjes_g(k, rho / a + kesten_mckay_edge(k)).unwrap();
        let textbook = rho + a * kesten_mckay_edge(k) - a / g;
        assert_relative_eq!(q_sparse(a, k, rho).unwrap(), textbook, epsilon = 1e-12);
    }

    #[test]
    fn q_dense_limits() {
        assert_relative_eq!(q_dense(1.0, 1e-9).unwrap(), 1.0 / 2.0_f64.sqrt(), epsilon = 1e-4);
        let rho = 1e6;
        assert!((rho * q_dense(1.0, rho).unwrap() / 0.5 - 1.0).abs() < 1e-2);
        let (a, rho) = (0.8, 0.3);
        let alpha = a * a / 2.0;
        let textbook = rho + 2.0 * f64::sqrt(alpha) - 1.0 / c_dense(alpha, rho).unwrap();
        assert_relative_eq!(q_dense(a, rho).unwrap(), textbook, epsilon = 1e-12);
    }

    #[test]
    fn mi_chain_examples() {
        let r3 = mi_chain_check(3).unwrap();
        assert_relative_eq!(r3.bound, 4.0, epsilon = 1e-12);
        assert!(r3.holds(1e-6));
        assert!((r3.supremum - 4.0).abs() < 1e-6);
        let r4 = mi_chain_check(4).unwrap();
        assert!(r4.supremum <= 3.464_101_615_137_755 + 1e-6);
        let r50 = mi_chain_check(50).unwrap();
        assert!(r50.holds(1e-6));
        assert!(r50.bound < 2.9 && r50.bound > 8.0_f64.sqrt());
    }

    #[test]
    fn semicircle_cdf_is_consistent() {
        let alpha = 0.7;
        let r = 2.0 * f64::sqrt(alpha);
        assert_eq!(semicircle_cdf(-r, alpha), 0.0);
        assert_relative_eq!(semicircle_cdf(0.0, alpha), 0.5, epsilon = 1e-15);
        let x = 0.4;
        let q = quadrature::integrate(|nu| semicircle_pdf(nu, alpha), -r, x, 1e-12).unwrap();
        assert!((q - semicircle_cdf(x, alpha)).abs() < 1e-8);
    }
}
