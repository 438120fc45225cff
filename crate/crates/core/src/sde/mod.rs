//! Drift models, numerical integration and stationary statistics.

mod io;
mod lyapunov;
mod mass_spring;
mod model;
mod simulate;
mod stationary;

pub use io::{read_matrix, read_trajectory_csv, write_matrix, write_trajectory_csv};
pub use lyapunov::{lyapunov_residual, solve_lyapunov, stationary_covariance, LyapunovMethod};
pub use mass_spring::{mass_spring_drift, MassSpring, MassSpringBasis};
pub use model::{Basis, DriftModel, FnBasis, InteractionMatrix};
pub use simulate::{default_step, simulate, EulerMaruyama, Trajectory, DIVERGENCE_LIMIT};
pub use stationary::{sample_stationary, StationarySampler};
