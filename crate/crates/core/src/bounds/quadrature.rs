//! Adaptive Gauss-Kronrod (7/15) integration.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_SUBDIVISIONS: usize = 20_000;

/// 15-point Kronrod estimate and the embedded 7-point Gauss error estimate.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    let mut pieces = 0;
    while let Some((lo, hi, t)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{lo}, {hi}]")));
        }
        let mid = 0.5 * (lo + hi);
        if err <= t || mid <= lo || mid >= hi {
            total += value;
            continue;
        }
        pieces += 1;
        if pieces > MAX_SUBDIVISIONS {
            return Err(Error::NotConverged { iterations: pieces, last_update: err });
        }
        stack.push((lo, mid, 0.5 * t));
        stack.push((mid, hi, 0.5 * t));
    }
    Ok(total)
}

/// `∫_{-r}^{r} g(ν) √(r² - ν²) dν` through `ν = r sin θ`, which removes the
/// square-root behaviour at both edges.
pub fn integrate_semicircular(g: impl Fn(f64) -> f64, r: f64, tol: f64) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    integrate(
        |theta: f64| {
            let c = theta.cos();
            g(r * theta.sin()) * r * r * c * c
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 / 1e-2 * (1.0_f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn semicircle_area() {
        let v = integrate_semicircular(|_| 1.0, 2.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI * 2.0).abs() < 1e-11);
    }
}
