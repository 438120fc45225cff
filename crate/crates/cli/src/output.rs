use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Output directory; files are written whole and flushed.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes through `body` and returns the file path.
    pub fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>,
    ) -> CliResult<PathBuf> {
        let path = self.path(name);
        let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut w)?;
        w.flush().map_err(io_err)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let text = to_json(value);
        self.write_with(name, |w| {
            w.write_all(text.as_bytes())?;
            Ok(())
        })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialise");
    s.push('\n');
    s
}
