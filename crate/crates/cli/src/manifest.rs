use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    /// SHA-256 of the config file bytes, or of the serialized defaults
    /// when no file was given.
    pub config_sha256: String,
    pub master_seed: u64,
    pub threads: usize,
    pub liqsim_version: &'static str,
    pub cli_version: &'static str,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("manifest_{}.json", self.command));
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
