//! Artifact formats: CSV tables, JSON documents and the run manifest.
//!
//! CSV files have one header row, '.' decimals and every number written
//! as `{:.16e}` (17 significant digits, enough to round-trip an f64).
//! Non-finite values are written as `inf`, `-inf` or `nan`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A named file produced by a run, held in memory until it is written.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    pub fn json(name: impl Into<String>, value: &serde_json::Value) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        Self::new(name, text.into_bytes())
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Builds a CSV table row by row.
#[derive(Debug, Clone)]
pub struct CsvWriter {
    text: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = String::new();
        for (i, h) in header.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            text.push_str(h.as_ref());
        }
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "CSV row width");
        self.push_fields(values.iter().map(|v| fmt_f64(*v)));
    }

    /// A row whose first field is text.
    pub fn labeled_row(&mut self, label: &str, values: &[f64]) {
        assert_eq!(values.len() + 1, self.columns, "CSV row width");
        self.push_fields(std::iter::once(label.to_string()).chain(values.iter().map(|v| fmt_f64(*v))));
    }

    fn push_fields(&mut self, fields: impl Iterator<Item = String>) {
        for (i, f) in fields.enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{f}");
        }
        self.text.push('\n');
    }

    pub fn finish(self, name: impl Into<String>) -> Artifact {
        Artifact::new(name, self.text.into_bytes())
    }
}

/// A parsed CSV table: header plus rows of fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let header = lines.next()?.split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Some(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r.get(i).and_then(|s| parse_f64(s))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one run. Timing lives only here, so every other artifact is
/// reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub config: String,
    pub output_dir: PathBuf,
    pub artifacts: Vec<ArtifactEntry>,
    pub checks_passed: bool,
    pub duration_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn path_of(&self, file: &str) -> PathBuf {
        self.output_dir.join(file)
    }

    pub fn has_artifact(&self, file: &str) -> bool {
        self.artifacts.iter().any(|a| a.file == file)
    }

    /// Reads `dir/manifest.json`. `output_dir` is replaced by `dir`, so
    /// relative paths recorded by another process still resolve.
    pub fn load(dir: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let mut m: Self =
            serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        m.output_dir = dir.to_path_buf();
        Ok(m)
    }

    /// Recomputes every digest from disk; returns the files that differ.
    pub fn verify(&self) -> std::io::Result<Vec<String>> {
        let mut bad = Vec::new();
        for a in &self.artifacts {
            let bytes = fs::read(self.path_of(&a.file))?;
            if hex::encode(Sha256::digest(&bytes)) != a.sha256 || bytes.len() as u64 != a.bytes {
                bad.push(a.file.clone());
            }
        }
        Ok(bad)
    }
}

/// Writes the artifacts in order, one file at a time.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<ArtifactEntry>> {
    fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            fs::write(dir.join(&a.name), &a.bytes)?;
            Ok(ArtifactEntry { file: a.name.clone(), bytes: a.bytes.len() as u64, sha256: a.sha256() })
        })
        .collect()
}
