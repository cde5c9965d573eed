//! Output plumbing: atomic file writes, 17-significant-digit float
//! formatting, schema headers and the run manifest.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

use doublewell::first_passage::fnv1a64;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Floats serialize with 17 significant digits so reruns round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)
        .with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot finalize {}", path.display()))?;
    Ok(())
}

/// A CSV artifact with a schema-version comment line.
pub struct Csv {
    schema: String,
    lines: Vec<String>,
}

impl Csv {
    pub fn new(schema: &str, header: &str) -> Self {
        Csv {
            schema: schema.to_string(),
            lines: vec![header.to_string()],
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("# schema={}\n", self.schema);
        out.push_str(&self.lines.join("\n"));
        out.push('\n');
        out.into_bytes()
    }
}

/// Manifest describing one run: digest of the numeric inputs, seed, and
/// every artifact written.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: String,
    pub subcommand: String,
    pub config_digest: String,
    pub seed: u64,
    pub artifact_version: String,
    pub outputs: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub role: String,
}

pub struct OutputWriter {
    dir: PathBuf,
    subcommand: String,
    digest: u64,
    seed: u64,
    entries: Vec<ManifestEntry>,
}

impl OutputWriter {
    pub fn new(dir: PathBuf, subcommand: &str, config_text: &str, overrides: &str, seed: u64) -> Self {
        let digest = fnv1a64(format!("{config_text}\n#overrides:{overrides}").as_bytes());
        OutputWriter {
            dir,
            subcommand: subcommand.to_string(),
            digest,
            seed,
            entries: Vec::new(),
        }
    }


    pub fn write_csv(&mut self, name: &str, csv: &Csv, role: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, &csv.to_bytes())?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            role: role.to_string(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T, role: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        write_atomic(&path, body.as_bytes())?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            role: role.to_string(),
        });
        Ok(path)
    }

    /// Writes the manifest and returns it.
    pub fn finish(self) -> Result<RunManifest> {
        let manifest = RunManifest {
            schema: "doublewell.manifest.v1".to_string(),
            subcommand: self.subcommand.clone(),
            config_digest: format!("{:016x}", self.digest),
            seed: self.seed,
            artifact_version: ARTIFACT_VERSION.to_string(),
            outputs: self.entries,
        };
        let path = self.dir.join(format!("{}_manifest.json", self.subcommand));
        let mut body = serde_json::to_string_pretty(&manifest)?;
        body.push('\n');
        write_atomic(&path, body.as_bytes())?;
        Ok(manifest)
    }
}
