use nalgebra::DMatrix;

use crate::sde::{Basis, Trajectory};
use crate::{Error, Result};

/// Design matrix and Euler increments of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    /// Row `t` holds the features of state `x_t` (`n x q`).
    pub features: DMatrix<f64>,
    /// Row `t` holds `x_{t+1} - x_t` (`n x p`).
    pub targets: DMatrix<f64>,
    pub eta: f64,
}

impl RegressionData {
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> SufficientStats {
        SufficientStats {
            gram: self.features.tr_mul(&self.features),
            cross: self.features.tr_mul(&self.targets),
            n: self.len(),
            eta: self.eta,
        }
    }
}

/// Features are the states themselves when `basis` is `None`.
pub fn build_regression(traj: &Trajectory, basis: Option<&dyn Basis>) -> Result<RegressionData> {
    let n = traj.n_steps();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 steps, got {n}")));
    }
    let p = traj.dim();
    let q = match basis {
        Some(b) if b.state_dim() != p => return Err(Error::DimensionMismatch { expected: p, found: b.state_dim() }),
        Some(b) => b.len(),
        None => p,
    };
    let mut features = DMatrix::zeros(n, q);
    let mut targets = DMatrix::zeros(n, p);
    let mut row = vec![0.0; q];
    for t in 0..n {
        let (x, next) = (traj.state(t), traj.state(t + 1));
        match basis {
            Some(b) => b.eval(x, &mut row)?,
            None => row.copy_from_slice(x),
        }
        for (j, v) in row.iter().enumerate() {
            features[(t, j)] = *v;
        }
        for i in 0..p {
            targets[(t, i)] = next[i] - x[i];
        }
    }
    Ok(RegressionData { features, targets, eta: traj.eta() })
}

/// Raw second moments `Σ f fᵀ` and `Σ f Δxᵀ` of a regression problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub gram: DMatrix<f64>,
    pub cross: DMatrix<f64>,
    pub n: usize,
    pub eta: f64,
}

impl SufficientStats {
    pub fn features(&self) -> usize {
        self.gram.nrows()
    }

    pub fn targets(&self) -> usize {
        self.cross.ncols()
    }

    /// Observation time `n·η`.
    pub fn duration(&self) -> f64 {
        self.n as f64 * self.eta
    }

    /// `(1/n) Σ f fᵀ`.
    pub fn normalized_gram(&self) -> DMatrix<f64> {
        &self.gram / self.n as f64
    }

    /// `(1/(nη)) Σ f Δxᵀ`.
    pub fn normalized_cross(&self) -> DMatrix<f64> {
        &self.cross / (self.n as f64 * self.eta)
    }
}

const BUFFER_ROWS: usize = 256;

/// Streaming accumulation of [`SufficientStats`] without storing the path.
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    eta: f64,
    features: DMatrix<f64>,
    targets: DMatrix<f64>,
    filled: usize,
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    n: usize,
}

impl StatsAccumulator {
    pub fn new(n_features: usize, n_targets: usize, eta: f64) -> Self {
        Self {
            eta,
            features: DMatrix::zeros(BUFFER_ROWS, n_features),
            targets: DMatrix::zeros(BUFFER_ROWS, n_targets),
            filled: 0,
            gram: DMatrix::zeros(n_features, n_features),
            cross: DMatrix::zeros(n_features, n_targets),
            n: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n + self.filled
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, features: &[f64], increments: &[f64]) {
        debug_assert_eq!(features.len(), self.features.ncols());
        debug_assert_eq!(increments.len(), self.targets.ncols());
        let r = self.filled;
        for (j, v) in features.iter().enumerate() {
            self.features[(r, j)] = *v;
        }
        for (j, v) in increments.iter().enumerate() {
            self.targets[(r, j)] = *v;
        }
        self.filled += 1;
        if self.filled == BUFFER_ROWS {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let r = self.filled;
        if r == 0 {
            return;
        }
        let f = self.features.rows(0, r);
        self.gram.gemm_tr(1.0, &f, &f, 1.0);
        self.cross.gemm_tr(1.0, &f, &self.targets.rows(0, r), 1.0);
        self.n += r;
        self.filled = 0;
    }

    pub fn snapshot(&mut self) -> SufficientStats {
        self.flush();
        SufficientStats { gram: self.gram.clone(), cross: self.cross.clone(), n: self.n, eta: self.eta }
    }
}
