//! The `run-manifest.json` written next to every artifact set.
//!
//! Timestamps live only here, so the artifacts themselves stay
//! byte-identical across reruns with the same configuration.

use std::path::{Path, PathBuf};

use anyhow::Result;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::io::write_json;

pub const FILE_NAME: &str = "run-manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub artifacts: Vec<String>,
}

/// Collects artifacts while a command runs.
pub struct Recorder {
    command: String,
    config: serde_json::Value,
    seed: Option<u64>,
    started: DateTime<Utc>,
    artifacts: Vec<PathBuf>,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Recorder {
    pub fn start<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> Result<Recorder> {
        Ok(Recorder {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            started: Utc::now(),
            artifacts: Vec::new(),
        })
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    /// Adds a config-file echo, e.g. the text of a tag list.
    pub fn echo(&mut self, key: &str, value: serde_json::Value) {
        if let serde_json::Value::Object(map) = &mut self.config {
            map.insert(key.to_string(), value);
        }
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, path: &Path) -> Result<RunManifest> {
        let base = path.parent().unwrap_or(Path::new(""));
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config,
            seed: self.seed,
            started_at: stamp(self.started),
            finished_at: stamp(Utc::now()),
            artifacts: self
                .artifacts
                .iter()
                .map(|a| a.strip_prefix(base).unwrap_or(a).to_string_lossy().into_owned())
                .collect(),
        };
        write_json(path, &manifest)?;
        Ok(manifest)
    }
}

/// Manifest path for a single-file artifact: `<file>.run.json`.
pub fn beside(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".run.json");
    file.with_file_name(name)
}
