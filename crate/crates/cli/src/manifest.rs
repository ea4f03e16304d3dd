use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sqc::persistence::{Entry, RunConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written next to every command's outputs. Holds no timestamps, so two runs
/// with the same inputs produce the same manifest.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<Entry>,
    pub config: Option<RunConfig>,
    pub inputs: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            config_file: None,
            overrides: Vec::new(),
            config: None,
            inputs: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn with_config(mut self, file: Option<&Path>, overrides: Vec<Entry>, cfg: &RunConfig, seed: u64) -> Self {
        self.config_file = file.map(Path::to_path_buf);
        self.overrides = overrides;
        self.config = Some(cfg.clone());
        self.seed = Some(seed);
        self
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
