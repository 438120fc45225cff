//! Closed-form spectral quantities and observation-time lower bounds.

pub mod quadrature;
mod report;
mod spectral;

pub use report::{
    general_bound, lower_bound_dense, lower_bound_nonlinear, lower_bound_sparse, BoundReport, NonlinearClassParams,
    Regime,
};
pub use spectral::{
    c_dense, kesten_mckay_cdf, kesten_mckay_edge, kesten_mckay_pdf, mi_chain_check, q_dense, q_sparse, semicircle_cdf,
    semicircle_pdf, stieltjes_g, MiChainReport,
};
