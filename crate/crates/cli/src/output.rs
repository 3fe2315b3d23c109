//! Run manifests and CSV tables.
//!
//! Every output file `name.csv` is paired with `name.manifest.json`, which
//! records the full configuration (defaults included), the argument vector
//! that reproduces it, the crate version and a timestamp.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

/// Bumped whenever a CSV layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub subcommand: &'static str,
    pub config: C,
    /// Arguments that reproduce the run, program name excluded.
    pub argv: Vec<String>,
    pub code_version: &'static str,
    pub schema_version: u32,
    pub columns: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub struct Output {
    dir: PathBuf,
    argv: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, argv: Vec<String>) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            argv,
        })
    }

    /// Writes `stem.csv` with the given header and rows, and its manifest.
    pub fn table<C: Serialize>(
        &self,
        stem: &str,
        subcommand: &'static str,
        config: C,
        columns: &[&str],
        rows: &[Vec<String>],
    ) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let manifest = RunManifest {
            subcommand,
            config,
            argv: self.argv.clone(),
            code_version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mpath = self.dir.join(format!("{stem}.manifest.json"));
        fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", mpath.display()))?;
        Ok(path)
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}
