//! Numerical laboratory for learning drift coefficients of stochastic
//! differential equations `dx = F(x; A) dt + db`.
//!
//! The crate is organised around five areas:
//!
//! * [`sde`]: drift models, Euler-Maruyama integration, stationary
//!   covariances from the continuous Lyapunov equation, and on-disk formats.
//! * [`ensembles`]: random sparse (signed regular graph) and dense
//!   (Wigner-type) interaction matrices, and mass-spring networks.
//! * [`bounds`]: closed-form spectral quantities (Kesten-McKay, semicircle)
//!   and the resulting lower bounds on the observation time.
//! * [`estimator`]: l1-penalised least-squares recovery of the signed
//!   support, and the sample-complexity sweep built on it.
//! * [`kzz`]: Monte-Carlo verification of the mutual-information /
//!   conditional-variance identity on finite priors.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod estimator;
pub mod kzz;
pub mod linalg;
mod parallel;
pub mod rng;
pub mod sde;

pub use error::{Error, ErrorKind, Result};
