//! Report manifests and JSON emission.
//!
//! Every report file embeds a manifest carrying the command, tool version,
//! seed, and full resolved configuration, so a report is reproducible from
//! its own contents. Serialization is deterministic: struct fields keep
//! declaration order, maps are sorted, and nothing volatile (timestamps,
//! wall-clock durations) is written.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C, outputs: &[&str]) -> Result<Manifest> {
        Ok(Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: serde_json::to_value(config)?,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// Wraps a report body with its manifest.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub manifest: Manifest,
    #[serde(flatten)]
    pub body: T,
}

/// Writes pretty JSON with a trailing newline; creates the directory first.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(&path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Writes plain text (for the plot-friendly columnar sweep output).
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
