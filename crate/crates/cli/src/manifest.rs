use std::path::{Path, PathBuf};

use anyhow::Context;
use rte_core::transient::Timing;
use rte_core::verification::ConvergenceStudy;
use rte_core::StabilityReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Refused,
    NotConverged,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Refused => 2,
            Status::NotConverged | Status::Failed => 1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Histories {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_norm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub status: Status,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    pub version: &'static str,
    pub config_path: PathBuf,
    /// Resolved configuration with defaults applied; the raw JSON when it did not parse.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub threads: usize,
    pub forced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_report: Option<StabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_proxy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_rate: Option<f64>,
    pub histories: Histories,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceStudy>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(mode: &'static str, config_path: &Path, threads: usize, forced: bool) -> Self {
        Manifest {
            status: Status::Ok,
            mode,
            failure_reason: None,
            version: env!("CARGO_PKG_VERSION"),
            config_path: config_path.to_path_buf(),
            config: None,
            threads,
            forced,
            stability_report: None,
            lambda: None,
            rho: None,
            timing: None,
            steps: None,
            bound_holds: None,
            positive: None,
            min_value: None,
            converged: None,
            tol: None,
            error_proxy: None,
            steady_residual: None,
            empirical_rate: None,
            histories: Histories::default(),
            convergence: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn fail(&mut self, status: Status, reason: impl Into<String>) {
        self.status = status;
        self.failure_reason = Some(reason.into());
    }

    /// Hashes `names` (relative to `dir`) into the file inventory.
    pub fn record_files(&mut self, dir: &Path, names: &[String]) -> anyhow::Result<()> {
        for name in names {
            let path = dir.join(name);
            let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            self.files.push(FileEntry {
                name: name.clone(),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
