use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::sde::{DriftModel, MassSpring};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Nearest neighbours on the grid.
    Grid,
    /// Nearest neighbours plus one diagonal per cell, which triangulates the
    /// grid and removes its zero-energy shear modes.
    GridWithDiagonals,
    /// Explicit springs between grid nodes, numbered row-major.
    Edges(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub rows: usize,
    pub cols: usize,
    pub topology: Topology,
    /// Grid spacing; every spring rests at the distance between its nodes.
    pub rest_length: f64,
    pub gamma_damp: f64,
    pub sigma: f64,
    /// Spatial dimension, at least 2 unless the grid is a single line.
    pub d: usize,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self { rows: 3, cols: 3, topology: Topology::Grid, rest_length: 1.0, gamma_damp: 2.0, sigma: 0.5, d: 2 }
    }
}

/// A mass-spring system together with its rest configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringNetwork {
    pub system: MassSpring,
    /// Rest positions `q`, mass-major.
    pub rest_positions: Vec<f64>,
}

impl SpringNetwork {
    pub fn model(&self) -> DriftModel {
        DriftModel::MassSpring(self.system.clone())
    }

    /// `[q_rest, 0]`, the full state at rest.
    pub fn rest_state(&self) -> Vec<f64> {
        let mut x = self.rest_positions.clone();
        x.resize(2 * x.len(), 0.0);
        x
    }

    pub fn springs(&self) -> &[(usize, usize)] {
        self.system.edges()
    }
}

/// Builds the network; nodes sit at `rest_length · (col, row)`.
pub fn mass_spring_network(spec: &NetworkSpec) -> Result<SpringNetwork> {
    let (rows, cols) = (spec.rows, spec.cols);
    let p = rows * cols;
    if p < 2 {
        return Err(Error::invalid("network needs at least two masses"));
    }
    if spec.d == 0 || (spec.d == 1 && rows > 1 && cols > 1) {
        return Err(Error::invalid(format!("a {rows}x{cols} grid does not fit in {} dimension(s)", spec.d)));
    }
    if !(spec.rest_length > 0.0) {
        return Err(Error::invalid("rest length must be positive"));
    }
    let node = |r: usize, c: usize| r * cols + c;
    let edges: Vec<(usize, usize)> = match &spec.topology {
        Topology::Grid | Topology::GridWithDiagonals => {
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        e.push((node(r, c), node(r, c + 1)));
                    }
                    if r + 1 < rows {
                        e.push((node(r, c), node(r + 1, c)));
                    }
                    if spec.topology == Topology::GridWithDiagonals && r + 1 < rows && c + 1 < cols {
                        e.push((node(r, c), node(r + 1, c + 1)));
                    }
                }
            }
            e
        }
        Topology::Edges(list) => list.clone(),
    };

    let mut positions = vec![0.0; p * spec.d];
    for r in 0..rows {
        for c in 0..cols {
            let i = node(r, c);
            if spec.d == 1 {
                positions[i] = spec.rest_length * (r + c) as f64;
            } else {
                positions[i * spec.d] = spec.rest_length * c as f64;
                positions[i * spec.d + 1] = spec.rest_length * r as f64;
            }
        }
    }

    let mut adjacency = DMatrix::zeros(p, p);
    let mut rest = DMatrix::zeros(p, p);
    for &(i, j) in &edges {
        if i >= p || j >= p || i == j {
            return Err(Error::invalid(format!("invalid spring ({i},{j}) for {p} masses")));
        }
        let dist =
            (0..spec.d).map(|c| (positions[i * spec.d + c] - positions[j * spec.d + c]).powi(2)).sum::<f64>().sqrt();
        adjacency[(i, j)] = 1.0;
        adjacency[(j, i)] = 1.0;
        rest[(i, j)] = dist;
        rest[(j, i)] = dist;
    }
    if !is_connected(&adjacency) {
        return Err(Error::invalid("spring network is disconnected"));
    }
    let system = MassSpring::new(adjacency, rest, spec.gamma_damp, spec.sigma, spec.d)?;
    Ok(SpringNetwork { system, rest_positions: positions })
}

fn is_connected(adjacency: &DMatrix<f64>) -> bool {
    let p = adjacency.nrows();
    let mut seen = vec![false; p];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..p {
            if adjacency[(i, j)] != 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
