mod args;
pub mod bound;
pub mod estimate;
pub mod kzz;
pub mod model;
pub mod phase;
pub mod simulate;
pub mod spring;

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Overrides};
use crate::error::CliResult;
use crate::output::OutDir;

const DEFAULT_OUT: &str = "out";

/// Global flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// A resolved config document plus the output directory it asked for.
pub struct Resolved {
    pub doc: Value,
    pub out: Option<PathBuf>,
}

impl Context {
    /// Layers defaults, the config file and `overrides`. An `out` entry in the
    /// file is honoured unless `--out` was given; it is not part of the echo.
    pub fn resolve(&self, mode: &str, defaults: Value, overrides: Overrides) -> CliResult<Resolved> {
        let mut file = match &self.config {
            Some(path) => Some(config::load_file(path, mode)?),
            None => None,
        };
        let file_out = file
            .as_mut()
            .and_then(|f| f.as_object_mut())
            .and_then(|o| o.remove("out"))
            .and_then(|v| v.as_str().map(PathBuf::from));
        let doc = config::merged(defaults, file, overrides);
        Ok(Resolved { doc, out: self.out.clone().or(file_out) })
    }

    /// Applies `--seed` and `--threads` where the mode has those fields.
    pub fn global_overrides(&self, seed: bool, threads: bool) -> Overrides {
        let mut o = Overrides::default();
        if seed {
            o.set("seed", self.seed);
        }
        if threads {
            o.set("threads", self.threads);
        }
        o
    }
}

impl Resolved {
    pub fn out_dir(&self) -> CliResult<OutDir> {
        OutDir::create(self.out.as_deref().unwrap_or(DEFAULT_OUT.as_ref()))
    }

    /// Output directory only when one was requested.
    pub fn requested_out_dir(&self) -> CliResult<Option<OutDir>> {
        self.out.as_ref().map(|p| OutDir::create(p)).transpose()
    }
}

/// `config.json`: the resolved config tagged with its mode, loadable again
/// through `--config`.
pub fn write_config_echo<C: Serialize>(out: &OutDir, mode: &str, cfg: &C) -> CliResult<()> {
    out.write_json("config.json", &echo(mode, cfg))?;
    Ok(())
}

pub fn echo<C: Serialize>(mode: &str, cfg: &C) -> Value {
    let mut v = serde_json::to_value(cfg).expect("configs serialise");
    if let Some(obj) = v.as_object_mut() {
        obj.insert("mode".into(), json!(mode));
    }
    v
}
