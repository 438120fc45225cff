//! Euler-Maruyama integration.

use rand_distr::{Distribution, StandardNormal};

use super::model::DriftModel;
use crate::linalg;
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// A path is aborted once any coordinate exceeds this magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Default step for the mass-spring model.
const MASS_SPRING_STEP: f64 = 0.005;

/// Uniformly sampled path `x_0, x_η, ..., x_{nη}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    eta: f64,
    dim: usize,
    states: Vec<f64>,
    seed: u64,
}

impl Trajectory {
    /// Assembles a trajectory from row-major states.
    pub fn from_states(eta: f64, dim: usize, states: Vec<f64>, seed: u64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::invalid(format!("step size must be > 0, got {eta}")));
        }
        if dim == 0 || !states.len().is_multiple_of(dim) || states.is_empty() {
            return Err(Error::DimensionMismatch { expected: dim, found: states.len() });
        }
        if states.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory state".into()));
        }
        Ok(Self { eta, dim, states, seed })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_steps(&self) -> usize {
        self.states.len() / self.dim - 1
    }

    /// Observation length `T = η · n_steps`.
    pub fn duration(&self) -> f64 {
        self.eta * self.n_steps() as f64
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.dim..(t + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.states
    }

    /// Prefix containing the first `n_steps` increments.
    pub fn truncated(&self, n_steps: usize) -> Trajectory {
        let n = n_steps.min(self.n_steps());
        Trajectory { eta: self.eta, dim: self.dim, states: self.states[..(n + 1) * self.dim].to_vec(), seed: self.seed }
    }
}

enum Kernel<'m> {
    Dense { rows: Vec<f64> },
    Sparse { row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64> },
    Model(&'m DriftModel),
}

impl<'m> Kernel<'m> {
    fn new(model: &'m DriftModel) -> Self {
        match model {
            DriftModel::Linear(a) => {
                let a = a.entries();
                let p = a.nrows();
                let nnz = a.iter().filter(|v| **v != 0.0).count();
                if nnz * 4 < p * p {
                    let mut row_ptr = vec![0];
                    let (mut cols, mut vals) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz));
                    for i in 0..p {
                        for j in 0..p {
                            if a[(i, j)] != 0.0 {
                                cols.push(j);
                                vals.push(a[(i, j)]);
                            }
                        }
                        row_ptr.push(cols.len());
                    }
                    Kernel::Sparse { row_ptr, cols, vals }
                } else {
                    Kernel::Dense { rows: linalg::to_row_major(a) }
                }
            }
            other => Kernel::Model(other),
        }
    }

    #[inline]
    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Kernel::Dense { rows } => {
                let p = x.len();
                for (o, row) in out.iter_mut().zip(rows.chunks_exact(p)) {
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
                Ok(())
            }
            Kernel::Sparse { row_ptr, cols, vals } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let r = row_ptr[i]..row_ptr[i + 1];
                    *o = cols[r.clone()].iter().zip(&vals[r]).map(|(&j, a)| a * x[j]).sum();
                }
                Ok(())
            }
            Kernel::Model(m) => m.drift(x, out),
        }
    }
}

/// Default step: `0.01 / ‖A‖_∞` for linear models, `0.005` for mass-spring.
pub fn default_step(model: &DriftModel) -> f64 {
    match model {
        DriftModel::Linear(a) => {
            let norm = linalg::inf_norm(a.entries());
            if norm > 0.0 {
                0.01 / norm
            } else {
                0.01
            }
        }
        DriftModel::BasisLinear { coefficients, .. } => {
            let norm = linalg::inf_norm(coefficients);
            if norm > 0.0 {
                0.01 / norm
            } else {
                0.01
            }
        }
        DriftModel::MassSpring(_) => MASS_SPRING_STEP,
    }
}

/// Step-by-step Euler-Maruyama integrator:
/// `x_{t+1} = x_t + F(x_t) η + √η · s ⊙ ξ_t`, with `s` the per-coordinate
/// noise amplitude and `ξ_t` standard Gaussian.
pub struct EulerMaruyama<'m> {
    kernel: Kernel<'m>,
    eta: f64,
    sqrt_eta: f64,
    noise: Vec<(usize, f64)>,
    rng: Rng,
    state: Vec<f64>,
    drift: Vec<f64>,
    steps: usize,
}

impl<'m> EulerMaruyama<'m> {
    pub fn new(model: &'m DriftModel, x0: &[f64], eta: f64, seed: u64) -> Result<Self> {
        Self::with_rng(model, x0, eta, rng::from_seed(seed))
    }

    pub fn with_rng(model: &'m DriftModel, x0: &[f64], eta: f64, rng: Rng) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!("step size must be > 0, got {eta}")));
        }
        let dim = model.state_dim();
        if x0.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x0.len() });
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial condition".into()));
        }
        if let DriftModel::Linear(a) = model {
            let stiffness = eta * linalg::inf_norm(a.entries());
            if stiffness > 0.1 {
                log::warn!("step size {eta} is coarse for this drift (eta·‖A‖ = {stiffness:.3})");
            }
        }
        let noise = model.noise_scales().into_iter().enumerate().filter(|(_, s)| *s != 0.0).collect();
        Ok(Self {
            kernel: Kernel::new(model),
            eta,
            sqrt_eta: eta.sqrt(),
            noise,
            rng,
            state: x0.to_vec(),
            drift: vec![0.0; dim],
            steps: 0,
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// Drift evaluated at the current state during the last step.
    pub fn last_drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.eta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Advances one step and returns the new state.
    pub fn step(&mut self) -> Result<&[f64]> {
        self.kernel.apply(&self.state, &mut self.drift)?;
        for (x, f) in self.state.iter_mut().zip(&self.drift) {
            *x += f * self.eta;
        }
        for &(i, s) in &self.noise {
            let xi: f64 = StandardNormal.sample(&mut self.rng);
            self.state[i] += s * self.sqrt_eta * xi;
        }
        self.steps += 1;
        let magnitude = self.state.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(magnitude <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { step: self.steps, magnitude });
        }
        Ok(&self.state)
    }
}

/// Simulates `n_steps` Euler-Maruyama steps from `x0`.
pub fn simulate(model: &DriftModel, x0: &[f64], eta: f64, n_steps: usize, seed: u64) -> Result<Trajectory> {
    let mut em = EulerMaruyama::new(model, x0, eta, seed)?;
    let dim = x0.len();
    let mut states = Vec::with_capacity((n_steps + 1) * dim);
    states.extend_from_slice(x0);
    for _ in 0..n_steps {
        states.extend_from_slice(em.step()?);
    }
    Ok(Trajectory { eta, dim, states, seed })
}
