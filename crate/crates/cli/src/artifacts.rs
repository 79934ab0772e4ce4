//! Artifact writers: CSV tables, key = value reports, and the hash
//! manifest.
//!
//! Every artifact opens with provenance comment lines (tool version, config
//! hash, seed) so a file can be traced back to the run that produced it.
//! Floats in CSV cells carry 17 significant digits, enough to reproduce the
//! exact f64 bit pattern on reload.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// 17-significant-digit decimal rendering; empty cell for masked values.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_opt_float(v: Option<f64>) -> String {
    v.map(csv_float).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn comment_lines(&self) -> String {
        format!(
            "# tool_version = {TOOL_VERSION}\n# config_hash = {}\n# seed = {}\n",
            self.config_hash, self.seed
        )
    }

    pub fn report_lines(&self) -> String {
        format!(
            "tool_version = {TOOL_VERSION}\nconfig_hash = {}\nseed = {}\n",
            self.config_hash, self.seed
        )
    }
}

/// Collects written files and finishes with a `path<TAB>sha256` manifest.
pub struct ArtifactSet {
    dir: PathBuf,
    prov: Provenance,
    written: Vec<(String, String)>,
}

impl ArtifactSet {
    pub fn create(dir: &Path, prov: Provenance) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prov,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn provenance(&self) -> &Provenance {
        &self.prov
    }

    /// Write a CSV artifact: provenance comments, a header line, rows.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let mut body = self.prov.comment_lines();
        body.push_str(header);
        body.push('\n');
        for row in rows {
            body.push_str(row);
            body.push('\n');
        }
        self.write_raw(name, body.as_bytes())
    }

    /// Write a key = value report with provenance up front.
    pub fn write_report(&mut self, name: &str, lines: &[String]) -> Result<PathBuf> {
        let mut body = self.prov.report_lines();
        for line in lines {
            body.push_str(line);
            body.push('\n');
        }
        self.write_raw(name, body.as_bytes())
    }

    pub fn write_raw(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push((name.to_string(), sha256_hex(bytes)));
        Ok(path)
    }

    /// Write `manifest.tsv` last; it lists every artifact with its hash.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.written.sort();
        let mut body = String::new();
        for (name, hash) in &self.written {
            let _ = writeln!(body, "{name}\t{hash}");
        }
        let path = self.dir.join("manifest.tsv");
        fs::write(&path, body.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
