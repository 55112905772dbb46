//! JSON record of a sweep: resolved configuration, one entry per planned
//! point, and checksums of the files written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::table::sha256_hex;
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Done,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub sector_dimension: usize,
    pub gap: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub quadrature_evaluations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(rename = "L")]
    pub sites: usize,
    pub params: Vec<f64>,
    pub status: PointStatus,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PointDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub csv_schema: String,
    pub config: BTreeMap<String, String>,
    pub planned: usize,
    pub completed: usize,
    pub failed: usize,
    pub points: Vec<PointRecord>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    /// `sweep.csv` gets `sweep.csv.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_os_string();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::schema(path, e.to_string()))
    }

    /// Checks every recorded output against the bytes on disk.
    pub fn verify_outputs(&self) -> Result<()> {
        for out in &self.outputs {
            let bytes = std::fs::read(&out.path).map_err(|e| CliError::io(&out.path, e))?;
            if bytes.len() != out.bytes || sha256_hex(&bytes) != out.sha256 {
                return Err(CliError::schema(&out.path, "checksum does not match the manifest"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(RunManifest::path_for(Path::new("out/run.csv")), PathBuf::from("out/run.csv.manifest.json"));
    }

    #[test]
    fn json_round_trip_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("a.csv");
        std::fs::write(&csv, "x\n").unwrap();
        let mut m = RunManifest {
            tool_version: "t".into(),
            command: "sweep".into(),
            csv_schema: "s".into(),
            config: BTreeMap::from([("L".to_string(), "8".to_string())]),
            planned: 1,
            completed: 0,
            failed: 1,
            points: vec![PointRecord {
                sites: 8,
                params: vec![0.5],
                status: PointStatus::Failed,
                seconds: 0.1,
                error: Some("boom".into()),
                diagnostics: None,
            }],
            outputs: vec![OutputRecord { path: csv.clone(), sha256: sha256_hex(b"x\n"), bytes: 2 }],
        };
        let path = dir.path().join("m.json");
        std::fs::write(&path, m.to_json()).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back, m);
        assert!(m.to_json().contains("\"status\": \"failed\""));
        back.verify_outputs().unwrap();
        std::fs::write(&csv, "y\n").unwrap();
        assert!(back.verify_outputs().is_err());
        m.outputs.clear();
        m.verify_outputs().unwrap();
    }
}
