use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::lyapunov::stationary_covariance;
use super::model::InteractionMatrix;
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Draws from the stationary law `N(0, Σ∞)` of a linear SDE through a
/// Cholesky factor of `Σ∞`.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    factor: DMatrix<f64>,
}

impl StationarySampler {
    pub fn new(a: &InteractionMatrix) -> Result<Self> {
        let sigma = stationary_covariance(a)?;
        Self::from_covariance(sigma)
    }

    pub fn from_covariance(sigma: DMatrix<f64>) -> Result<Self> {
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::NonFinite("stationary covariance is not positive definite".into()))?;
        Ok(Self { factor: chol.l() })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let p = self.dim();
        let z: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
        (0..p).map(|i| (0..=i).map(|j| self.factor[(i, j)] * z[j]).sum()).collect()
    }
}

/// One draw `x ~ N(0, Σ∞(A))`, deterministic per seed.
pub fn sample_stationary(a: &InteractionMatrix, seed: u64) -> Result<Vec<f64>> {
    let sampler = StationarySampler::new(a)?;
    Ok(sampler.sample(&mut rng::from_seed(seed)))
}
