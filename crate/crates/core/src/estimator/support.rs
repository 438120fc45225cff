use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Entry `sign(a_ij)` where `|a_ij| > tau`, 0 elsewhere.
pub fn signed_support(a: &DMatrix<f64>, tau: f64) -> DMatrix<i8> {
    a.map(|v| if v.abs() > tau { v.signum() as i8 } else { 0 })
}

/// Threshold at the midpoint of the largest gap between consecutive sorted
/// magnitudes `0 ≤ |a|_(1) ≤ ... ≤ |a|_(n)`, used when no coupling floor is known.
pub fn gap_threshold(a: &DMatrix<f64>) -> f64 {
    let mut mags: Vec<f64> = a.iter().map(|v| v.abs()).collect();
    mags.push(0.0);
    mags.sort_by(f64::total_cmp);
    let mut best = (0.0, 0.0);
    for w in mags.windows(2) {
        let gap = w[1] - w[0];
        if gap > best.0 {
            best = (gap, 0.5 * (w[0] + w[1]));
        }
    }
    best.1
}

/// Outcome of comparing an estimated signed support with the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub estimated_sign: Vec<Vec<i8>>,
    pub truth_sign: Vec<Vec<i8>>,
    pub success: bool,
    /// Mismatched entries per row.
    pub row_errors: Vec<usize>,
    pub lambda: f64,
    pub threshold: f64,
    /// Observation time the estimate used.
    pub duration: f64,
}

impl RecoveryResult {
    pub fn compare(estimated: &DMatrix<i8>, truth: &DMatrix<i8>, lambda: f64, threshold: f64, duration: f64) -> Self {
        assert_eq!(estimated.shape(), truth.shape(), "sign matrices must have the same shape");
        let rows = |m: &DMatrix<i8>| -> Vec<Vec<i8>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
        let row_errors: Vec<usize> = estimated
            .row_iter()
            .zip(truth.row_iter())
            .map(|(e, t)| e.iter().zip(t.iter()).filter(|(a, b)| a != b).count())
            .collect();
        Self {
            estimated_sign: rows(estimated),
            truth_sign: rows(truth),
            success: row_errors.iter().all(|&e| e == 0),
            row_errors,
            lambda,
            threshold,
            duration,
        }
    }

    pub fn errors(&self) -> usize {
        self.row_errors.iter().sum()
    }
}
