//! Random instances of the sparse and dense drift ensembles, and mass-spring
//! networks on a planar grid.

mod graph;
mod linear;
mod network;

pub use graph::{random_regular_graph, random_regular_signed, RETRY_BUDGET};
pub use linear::{
    dense_ensemble_sample, dense_shift, empirical_variance_rate, in_dense_class, in_sparse_class,
    sparse_ensemble_sample, sparse_shift, DenseEnsembleSpec, SparseEnsembleSpec, SHIFT_FLOOR,
};
pub use network::{mass_spring_network, NetworkSpec, SpringNetwork, Topology};
