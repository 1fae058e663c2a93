//! In-memory artifacts, written atomically once a command has succeeded.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    pub notes: Vec<String>,
}

impl Artifacts {
    pub fn add<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| CliError::Io(format!("formatting {name}: {e}")))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Temp file plus rename per output; the manifest goes last.
    pub fn write_all(&self, out: &Path, manifest: &Manifest) -> Result<(), CliError> {
        fs::create_dir_all(out)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
        let mut json =
            serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
        json.push(b'\n');
        for (name, bytes) in self
            .files
            .iter()
            .chain(std::iter::once(&("manifest.json".to_string(), json)))
        {
            let io = |e: std::io::Error| CliError::Io(format!("writing {name}: {e}"));
            let mut tmp = NamedTempFile::new_in(out).map_err(io)?;
            tmp.write_all(bytes).map_err(io)?;
            tmp.persist(out.join(name)).map_err(|e| io(e.error))?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// Fully resolved run parameters; feeding the manifest back as
    /// `--config` reproduces the data files.
    pub params: std::collections::BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn new(
        command: &str,
        params: std::collections::BTreeMap<String, String>,
        artifacts: &Artifacts,
        wall: Duration,
    ) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            outputs: artifacts.names(),
            notes: artifacts.notes.clone(),
            wall_seconds: wall.as_secs_f64(),
        }
    }
}
