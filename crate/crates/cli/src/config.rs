//! Resolution of a subcommand's settings: built-in defaults, then the JSON
//! config file, then command-line flags, deserialised into the mode's type.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Flag values that take precedence over the config file. Keys may be
/// dotted (`network.rows`) to reach nested objects.
#[derive(Debug, Default)]
pub struct Overrides(Vec<(String, Value)>);

impl Overrides {
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            let v = serde_json::to_value(v).expect("flag values serialise");
            self.0.push((key.to_string(), v));
        }
        self
    }
}

/// Reads a config document. A `mode` key, when present, must name `mode`.
pub fn load_file(path: &Path, mode: &str) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let Some(obj) = value.as_object_mut() else {
        return Err(CliError::config(format!("{}: expected a JSON object", path.display())));
    };
    match obj.remove("mode") {
        None => {}
        Some(Value::String(m)) if m == mode => {}
        Some(other) => {
            return Err(CliError::config(format!("config is for mode {other}, not {mode:?}")));
        }
    }
    Ok(value)
}

/// Layers the optional file document and then the overrides over `defaults`.
pub fn merged(defaults: Value, file: Option<Value>, overrides: Overrides) -> Value {
    let mut doc = defaults;
    if let Some(f) = file {
        merge(&mut doc, f);
    }
    for (key, v) in overrides.0 {
        set_path(&mut doc, &key, v);
    }
    doc
}

pub fn finish<T: DeserializeOwned>(doc: Value) -> CliResult<T> {
    serde_json::from_value(doc).map_err(|e| CliError::config(e.to_string()))
}

pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(doc: &mut Value, key: &str, v: Value) {
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        let obj = node.as_object_mut().expect("object");
        if parts.peek().is_none() {
            obj.insert(part.to_string(), v);
            return;
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
}

/// Parses `RxC` grid sizes such as `3x3`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let r = r.trim().parse().map_err(|_| format!("bad row count in {s:?}"))?;
    let c = c.trim().parse().map_err(|_| format!("bad column count in {s:?}"))?;
    Ok((r, c))
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn later_layers_win() {
        let mut o = Overrides::default();
        o.set("network.rows", Some(4)).set("seed", None::<u64>);
        let v = merged(
            json!({"seed": 1, "network": {"rows": 3, "cols": 3}}),
            Some(json!({"seed": 2, "network": {"cols": 5}})),
            o,
        );
        assert_eq!(v, json!({"seed": 2, "network": {"rows": 4, "cols": 5}}));
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(parse_grid("3x4"), Ok((3, 4)));
        assert!(parse_grid("3-4").is_err());
    }
}
