use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    /// Not run because a stage it depends on failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub cause: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceRow {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool: String,
    pub tool_version: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<Artifact>,
    pub acceptance: Vec<AcceptanceRow>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(config_json: &str, seed: u64) -> Self {
        Self {
            config_hash: sha256_hex(config_json.as_bytes()),
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            stages: Vec::new(),
            artifacts: Vec::new(),
            acceptance: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.acceptance.iter().all(|r| r.pass)
    }

    /// Records a file written under `root`.
    pub fn add_artifact(&mut self, root: &Path, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
        self.artifacts.push(Artifact { path: rel, sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn check(&mut self, check: impl Into<String>, value: f64, threshold: f64, pass: bool) {
        self.acceptance.push(AcceptanceRow { check: check.into(), value, threshold, pass });
    }

    /// Plain-text acceptance table, one `PASS`/`FAIL` line per row.
    pub fn acceptance_table(&self) -> String {
        let mut out = String::new();
        for r in &self.acceptance {
            let tag = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {} value={:e} threshold={:e}\n", r.check, r.value, r.threshold));
        }
        out
    }
}
