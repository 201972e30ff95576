//! Output directories, CSV/JSON writers and content manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

/// 12 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn csv_string<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| fmt_num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Reads a two-column numeric CSV with a header line.
pub fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    lines.next().ok_or_else(|| CliError::format(path, "empty file"))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut cells = line.split(',').map(|c| c.trim().parse::<f64>());
        match (cells.next(), cells.next()) {
            (Some(Ok(x)), Some(Ok(y))) => {
                a.push(x);
                b.push(y);
            }
            _ => return Err(CliError::format(path, format!("line {}: expected two numbers", i + 2))),
        }
    }
    Ok((a, b))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Input of the command after defaults and overrides were applied.
    pub input: serde_json::Value,
    pub seed: Option<u64>,
    pub status: Option<String>,
    /// Recorded only when timing was requested, so outputs stay byte-identical.
    pub wall_clock_seconds: Option<f64>,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(command: &str, input: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input,
            seed: None,
            status: None,
            wall_clock_seconds: None,
            notes: Vec::new(),
            files: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// A directory whose files are tracked for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    manifest: Manifest,
}

impl OutputDir {
    pub fn create(root: &Path, manifest: Manifest) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), manifest })
    }

    /// Reopens a finished directory to add files to it.
    pub fn reopen(root: &Path) -> Result<Self> {
        let manifest = read_json(&root.join(MANIFEST))?;
        Ok(Self { root: root.to_path_buf(), manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_mut(&mut self) -> &mut Manifest {
        &mut self.manifest
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        let entry =
            FileEntry { path: rel.to_string(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() as u64 };
        match self.manifest.files.iter_mut().find(|f| f.path == rel) {
            Some(existing) => *existing = entry,
            None => self.manifest.files.push(entry),
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        self.write(rel, &json_string(value))
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self) -> Result<Manifest> {
        let path = self.root.join(MANIFEST);
        fs::write(&path, json_string(&self.manifest)).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// Checks that every file listed in the manifest exists with its digest.
pub fn verify_manifest(root: &Path) -> Result<Manifest> {
    let manifest: Manifest = read_json(&root.join(MANIFEST))?;
    for entry in &manifest.files {
        let path = root.join(&entry.path);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        if sha256_hex(&bytes) != entry.sha256 {
            return Err(CliError::format(path, "digest does not match the manifest"));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
        let back: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["x", "u"], [[0.0, 1.5], [2.0, -3.0]]);
        assert_eq!(s, "x,u\n0.00000000000e0,1.50000000000e0\n2.00000000000e0,-3.00000000000e0\n");
    }
}
