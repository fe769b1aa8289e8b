//! Flat `key=value` run records written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Every flag value that influences the output, in a stable order.
    pub params: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
    pub duration: Duration,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            params: Vec::new(),
            outputs: Vec::new(),
            duration: Duration::ZERO,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut s = format!("command={}\nversion={}\n", self.command, self.version);
        if let Some(seed) = self.seed {
            s += &format!("seed={seed}\n");
        }
        for (k, v) in &self.params {
            s += &format!("{k}={v}\n");
        }
        let outputs: Vec<String> = self
            .outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        s += &format!("outputs={}\n", outputs.join(","));
        s += &format!("duration_ms={}\n", self.duration.as_millis());
        s
    }

    /// `<path>.manifest` next to the given output.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn write_next_to(&self, output: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(output);
        fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
