//! Provenance record attached to every report.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Value,
    pub master_seed: u64,
    pub version: String,
    /// SHA-256 of every input file, keyed by path as given.
    pub input_digests: BTreeMap<String, String>,
    /// Wall-clock seconds; the only field that differs between identical runs.
    pub duration_s: f64,
}

/// Collects inputs while a command runs and stamps the manifest at the end.
pub struct Recorder {
    command: String,
    flags: Value,
    seed: u64,
    digests: BTreeMap<String, String>,
    started: Instant,
}

impl Recorder {
    pub fn new(command: &str, flags: &impl Serialize, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            flags: serde_json::to_value(flags).expect("flags serialize"),
            seed,
            digests: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        self.digests.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    pub fn finish(self) -> RunManifest {
        RunManifest {
            command: self.command,
            flags: self.flags,
            master_seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: self.digests,
            duration_s: self.started.elapsed().as_secs_f64(),
        }
    }
}
