//! Run manifests written alongside every command's outputs.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Records what produced the files in an output directory. Re-running the
/// recorded invocation with the same inputs reproduces the outputs
/// byte-for-byte; nothing time- or host-dependent is stored.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub out_dir: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, out_dir: &Path, seed: u64) -> Self {
        RunManifest {
            tool: "faultloc",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            argv: std::env::args().collect(),
            inputs,
            out_dir: out_dir.display().to_string(),
            seed,
            config: None,
            space: None,
        }
    }

    pub fn with_config(mut self, config: String) -> Self {
        self.config = Some(config);
        self
    }

    pub fn with_space(mut self, space: String) -> Self {
        self.space = Some(space);
        self
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
