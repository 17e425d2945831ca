//! Output files: CSV with a config-hash comment line before the header,
//! JSON reports carrying the hash inline, and the provenance block.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Canonical hash of the resolved configuration JSON.
pub fn config_hash(resolved: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(resolved).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

pub struct OutputDir {
    pub dir: PathBuf,
    pub hash: String,
}

impl OutputDir {
    pub fn create(dir: &Path, hash: String) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            hash,
        })
    }

    /// Writes a CSV file: `# config_hash <hex>` comment, then the header row,
    /// then the records. Floats are printed in shortest round-trip form.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut body = String::new();
        body.push_str(&format!("# config_hash {}\n", self.hash));
        body.push_str(&header.join(","));
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// Writes a JSON file with the config hash injected at the top level.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        if let Some(obj) = v.as_object_mut() {
            obj.insert(
                "config_hash".into(),
                serde_json::Value::String(self.hash.clone()),
            );
        }
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&v)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// The provenance block: resolved config, versions, wall time, seed.
    /// Timestamps live here and nowhere else.
    pub fn write_provenance(
        &self,
        subcommand: &str,
        resolved: &serde_json::Value,
        started: Instant,
        seed: Option<u64>,
    ) -> Result<PathBuf> {
        let provenance = serde_json::json!({
            "subcommand": subcommand,
            "config": resolved,
            "config_hash": self.hash,
            "versions": {
                "cdde": env!("CARGO_PKG_VERSION"),
            },
            "seed": seed,
            "wall_seconds": started.elapsed().as_secs_f64(),
            "timestamp": chrono::Utc::now().to_rfc3339(),
        });
        let path = self.dir.join("provenance.json");
        fs::write(&path, serde_json::to_string_pretty(&provenance)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form of a double.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
