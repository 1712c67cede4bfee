//! Run manifests: the resolved job, written before any work starts.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::commands::Job;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every option with its default filled in.
    pub config: Job,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: Option<usize>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: Option<u64>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl RunManifest {
    pub fn start(config: Job, threads: Option<usize>) -> Self {
        Self {
            subcommand: config.name().to_string(),
            seed: config.seed(),
            inputs: config.inputs(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            outputs: Vec::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
        }
    }

    pub fn finish(&mut self, outputs: Vec<PathBuf>) {
        self.outputs = outputs;
        self.finished_unix_ms = Some(now_ms());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
