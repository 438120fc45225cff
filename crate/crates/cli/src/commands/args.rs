use std::path::PathBuf;

use clap::{Args, ValueEnum};

use super::model::ModelKind;
use crate::config::{parse_grid, Overrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Grid,
    GridWithDiagonals,
}

impl TopologyArg {
    pub fn name(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::GridWithDiagonals => "grid-with-diagonals",
        }
    }
}

/// Flags for a mass-spring network, written under `prefix`.
#[derive(Debug, Clone, Default, Args)]
pub struct NetworkArgs {
    /// Grid size as ROWSxCOLS.
    #[arg(long, value_parser = parse_grid, value_name = "RxC")]
    pub grid: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyArg>,
    #[arg(long)]
    pub rest_length: Option<f64>,
    /// Damping coefficient.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Noise amplitude on the velocities.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Spatial dimension.
    #[arg(long)]
    pub dim: Option<usize>,
}

impl NetworkArgs {
    pub fn apply(&self, o: &mut Overrides, prefix: &str) {
        let key = |k: &str| format!("{prefix}.{k}");
        o.set(&key("rows"), self.grid.map(|g| g.0))
            .set(&key("cols"), self.grid.map(|g| g.1))
            .set(&key("topology"), self.topology.map(TopologyArg::name))
            .set(&key("rest_length"), self.rest_length)
            .set(&key("gamma_damp"), self.gamma)
            .set(&key("sigma"), self.sigma)
            .set(&key("d"), self.dim);
    }
}

/// Flags selecting the drift model.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Dimension of a random ensemble.
    #[arg(long)]
    pub p: Option<usize>,
    /// Row degree of the sparse ensemble.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub a_min: Option<f64>,
    /// Stability margin.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Coordinate file holding the interaction matrix.
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    #[command(flatten)]
    pub network: NetworkArgs,
}

impl ModelArgs {
    pub fn apply(&self, o: &mut Overrides) {
        // A matrix file on its own selects the matrix model.
        let kind = self.model.or(self.matrix.as_ref().map(|_| ModelKind::Matrix));
        o.set("model.kind", kind.map(ModelKind::name))
            .set("model.p", self.p)
            .set("model.k", self.k)
            .set("model.a_min", self.a_min)
            .set("model.rho", self.rho)
            .set("model.path", self.matrix.as_ref());
        self.network.apply(o, "model.network");
    }
}
