//! CSV artifacts and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV whose first line is `# config-sha256=<hex>`.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
    rows: usize,
}

impl Csv {
    pub fn new(config_sha: &str, header: &[&str]) -> Self {
        let mut text = format!("# config-sha256={config_sha}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Csv {
            text,
            columns: header.len(),
            rows: 0,
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn into_artifact(self, name: impl Into<String>) -> Artifact {
        Artifact {
            name: name.into(),
            bytes: self.text.into_bytes(),
            rows: Some(self.rows),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub name: String,
    pub bytes: Vec<u8>,
    /// Data rows for CSVs.
    pub rows: Option<usize>,
}

impl Artifact {
    pub fn json(name: impl Into<String>, value: &serde_json::Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("json serializes");
        bytes.push(b'\n');
        Artifact {
            name: name.into(),
            bytes,
            rows: None,
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub sha256: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    /// Task name, or `figure:<name>`.
    pub run: String,
    /// `ok`, `no-gap-mode` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub configs: Vec<ConfigRecord>,
    pub files: Vec<FileRecord>,
    pub summary: serde_json::Value,
    pub started_unix_s: f64,
    pub wall_time_s: f64,
}

impl ResultManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("unreadable manifest {}: {e}", path.display())))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes every artifact, in order, and returns their records.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<FileRecord>, CliError> {
    ensure_dir(dir)?;
    let mut out = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            ensure_dir(parent)?;
        }
        fs::write(&path, &a.bytes).map_err(|e| CliError::io(&path, e))?;
        out.push(FileRecord {
            path: a.name.clone(),
            sha256: a.sha256(),
            bytes: a.bytes.len() as u64,
            rows: a.rows,
        });
    }
    Ok(out)
}

/// Temp file plus rename, so readers never see a partial manifest.
pub fn write_manifest(dir: &Path, manifest: &ResultManifest) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join(MANIFEST_NAME);
    let tmp = dir.join(format!(".{MANIFEST_NAME}.tmp"));
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Human-readable one-line listing used by the binary.
pub fn describe(manifest: &ResultManifest) -> String {
    let mut s = format!("{} {}: {}", manifest.tool, manifest.run, manifest.status);
    for f in &manifest.files {
        let _ = write!(s, "\n  {}", f.path);
        if let Some(r) = f.rows {
            let _ = write!(s, " ({r} rows)");
        }
    }
    s
}
