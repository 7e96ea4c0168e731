use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: &'static str,
    /// sha256 of the canonical definition document.
    pub definition_digest: String,
    pub seed: u64,
    /// Seconds, only with `--record-time`.
    pub wall_clock: Option<f64>,
}

pub struct MetaSource {
    digest: String,
    seed: u64,
    started: Option<Instant>,
}

impl MetaSource {
    pub fn new(canonical_definition: &str, seed: u64, record_time: bool) -> Self {
        Self {
            digest: hex::encode(Sha256::digest(canonical_definition.as_bytes())),
            seed,
            started: record_time.then(Instant::now),
        }
    }

    pub fn meta(&self) -> Meta {
        Meta {
            version: env!("CARGO_PKG_VERSION"),
            definition_digest: self.digest.clone(),
            seed: self.seed,
            wall_clock: self.started.map(|t| t.elapsed().as_secs_f64()),
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    let target = dir.join(name);
    tmp.persist(&target)
        .with_context(|| format!("cannot write {}", target.display()))?;
    Ok(())
}

/// Serializes `report` with a trailing `meta` object.
pub fn write_report<T: Serialize>(dir: &Path, name: &str, report: &T, meta: Meta) -> Result<()> {
    let mut value = serde_json::to_value(report)?;
    if let Value::Object(map) = &mut value {
        map.insert("meta".into(), serde_json::to_value(meta)?);
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_atomic(dir, name, &text)
}

pub fn write_csv<I>(dir: &Path, name: &str, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut text = String::new();
    writeln!(text, "{header}")?;
    for row in rows {
        writeln!(text, "{row}")?;
    }
    write_atomic(dir, name, &text)
}
