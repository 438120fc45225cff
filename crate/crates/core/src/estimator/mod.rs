//! Signed-support recovery by ℓ1-penalised least squares on Euler increments,
//! and Monte-Carlo sample-complexity experiments built on it.

mod experiment;
mod lasso;
mod regression;
mod spring;
mod support;

pub use experiment::{
    estimate_sample_complexity, isotonic_deviation, t_star, EnsembleSpec, PhaseConfig, PhaseOutcome, PhaseRow,
};
pub use lasso::{
    default_lambda, kkt_violation, l1_drift_estimate, lasso, LassoFit, LassoOptions, DEFAULT_LAMBDA_SCALE,
};
pub use regression::{build_regression, RegressionData, StatsAccumulator, SufficientStats};
pub use spring::{edge_scores, spring_recovery, spring_trial, SpringConfig, SpringOutcome, SpringTrial};
pub use support::{gap_threshold, signed_support, RecoveryResult};
