//! Drift model selection shared by `simulate` and `estimate`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use sdelimits::ensembles::{mass_spring_network, DenseEnsembleSpec, NetworkSpec, SparseEnsembleSpec, SpringNetwork};
use sdelimits::estimator::EnsembleSpec;
use sdelimits::sde::{read_matrix, DriftModel, InteractionMatrix};

use crate::config;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Signed random regular graph, shifted to margin rho.
    Sparse,
    /// Dense Wigner-type matrix, shifted to margin rho.
    Dense,
    /// Interaction matrix read from a coordinate file.
    Matrix,
    /// Mass-spring network.
    Spring,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sparse => "sparse",
            Self::Dense => "dense",
            Self::Matrix => "matrix",
            Self::Spring => "spring",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Coordinate file for `matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
}

/// A model ready to simulate, with what is known about its ground truth.
pub struct BuiltModel {
    pub model: DriftModel,
    pub linear: Option<InteractionMatrix>,
    pub network: Option<SpringNetwork>,
    /// Support threshold matched to the coupling floor.
    pub tau: Option<f64>,
}

/// Defaults for the fields the kind in `doc[key]` uses; a partial `network`
/// object given on the command line is completed from the default network.
pub fn fill_defaults(doc: &mut Value, key: &str) {
    let Some(model) = doc.get_mut(key).and_then(Value::as_object_mut) else {
        return;
    };
    match model.get("kind").and_then(Value::as_str) {
        Some("sparse") | Some("dense") => {
            model.entry("a_min").or_insert(1.0.into());
            model.entry("rho").or_insert(0.1.into());
            if model.get("kind").and_then(Value::as_str) == Some("sparse") {
                model.entry("k").or_insert(3.into());
            }
        }
        Some("spring") => {
            let mut base = serde_json::to_value(NetworkSpec::default()).expect("network spec serialises");
            if let Some(given) = model.remove("network") {
                config::merge(&mut base, given);
            }
            model.insert("network".into(), base);
        }
        _ => {}
    }
}

impl ModelSpec {
    fn require<T: Copy>(&self, v: Option<T>, name: &str) -> CliResult<T> {
        v.ok_or_else(|| CliError::config(format!("model.{name} is required for model kind {}", self.kind.name())))
    }

    fn unused(&self, fields: &[(&str, bool)]) -> CliResult<()> {
        match fields.iter().find(|(_, set)| *set) {
            Some((name, _)) => {
                Err(CliError::config(format!("model.{name} does not apply to model kind {}", self.kind.name())))
            }
            None => Ok(()),
        }
    }

    pub fn ensemble(&self) -> CliResult<Option<EnsembleSpec>> {
        let spec = match self.kind {
            ModelKind::Sparse => EnsembleSpec::Sparse(SparseEnsembleSpec {
                p: self.require(self.p, "p")?,
                k: self.require(self.k, "k")?,
                a_min: self.require(self.a_min, "a_min")?,
                rho: self.require(self.rho, "rho")?,
            }),
            ModelKind::Dense => EnsembleSpec::Dense(DenseEnsembleSpec {
                p: self.require(self.p, "p")?,
                a_min: self.require(self.a_min, "a_min")?,
                rho: self.require(self.rho, "rho")?,
            }),
            _ => return Ok(None),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    /// Validates the fields for `kind` and builds the drift; random
    /// ensembles draw their matrix from `seed`.
    pub fn build(&self, seed: u64) -> CliResult<BuiltModel> {
        match self.kind {
            ModelKind::Sparse | ModelKind::Dense => {
                self.unused(&[("path", self.path.is_some()), ("network", self.network.is_some())])?;
                if self.kind == ModelKind::Dense {
                    self.unused(&[("k", self.k.is_some())])?;
                }
                let spec = self.ensemble()?.expect("ensemble kinds");
                let a = spec.sample(seed)?;
                Ok(BuiltModel {
                    model: DriftModel::linear(a.clone()),
                    linear: Some(a),
                    network: None,
                    tau: Some(spec.default_tau()),
                })
            }
            ModelKind::Matrix => {
                self.unused(&[
                    ("p", self.p.is_some()),
                    ("k", self.k.is_some()),
                    ("a_min", self.a_min.is_some()),
                    ("rho", self.rho.is_some()),
                    ("network", self.network.is_some()),
                ])?;
                let path = self
                    .path
                    .as_deref()
                    .ok_or_else(|| CliError::config("model.path is required for model kind matrix"))?;
                let a = InteractionMatrix::new(read_matrix_file(path)?)?;
                let tau = half_smallest_coupling(a.entries().iter().copied());
                Ok(BuiltModel { model: DriftModel::linear(a.clone()), linear: Some(a), network: None, tau })
            }
            ModelKind::Spring => {
                self.unused(&[
                    ("p", self.p.is_some()),
                    ("k", self.k.is_some()),
                    ("a_min", self.a_min.is_some()),
                    ("rho", self.rho.is_some()),
                    ("path", self.path.is_some()),
                ])?;
                let spec = self.network.clone().unwrap_or_default();
                let network = mass_spring_network(&spec)?;
                Ok(BuiltModel { model: network.model(), linear: None, network: Some(network), tau: None })
            }
        }
    }
}

pub fn read_matrix_file(path: &Path) -> CliResult<nalgebra::DMatrix<f64>> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    read_matrix(BufReader::new(f)).map_err(|e| match e {
        sdelimits::Error::Parse { .. } => CliError::config(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

/// Half the smallest nonzero magnitude, or `None` for an all-zero input.
pub fn half_smallest_coupling(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.filter(|v| *v != 0.0).map(f64::abs).reduce(f64::min).map(|m| 0.5 * m)
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn sparse_defaults_fill_in() {
        let mut doc = json!({"model": {"kind": "sparse", "p": 10}});
        fill_defaults(&mut doc, "model");
        let spec: ModelSpec = serde_json::from_value(doc["model"].clone()).unwrap();
        assert_eq!((spec.k, spec.a_min, spec.rho), (Some(3), Some(1.0), Some(0.1)));
        assert!(spec.build(1).unwrap().linear.is_some());
    }

    #[test]
    fn partial_network_is_completed() {
        let mut doc = json!({"model": {"kind": "spring", "network": {"rows": 2}}});
        fill_defaults(&mut doc, "model");
        let spec: ModelSpec = serde_json::from_value(doc["model"].clone()).unwrap();
        let net = spec.network.unwrap();
        assert_eq!((net.rows, net.cols), (2, 3));
    }

    #[test]
    fn missing_and_stray_fields_are_config_errors() {
        let spec = ModelSpec {
            kind: ModelKind::Sparse,
            p: None,
            k: Some(3),
            a_min: Some(1.0),
            rho: Some(0.1),
            path: None,
            network: None,
        };
        assert!(matches!(spec.build(0), Err(CliError::Config(m)) if m.contains("model.p")));
        let spec = ModelSpec { kind: ModelKind::Dense, p: Some(4), k: Some(3), ..spec };
        assert!(matches!(spec.build(0), Err(CliError::Config(m)) if m.contains("model.k")));
    }

    #[test]
    fn smallest_coupling() {
        assert_eq!(half_smallest_coupling([0.0, -0.4, 2.0].into_iter()), Some(0.2));
        assert_eq!(half_smallest_coupling([0.0].into_iter()), None);
    }
}
