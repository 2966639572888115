//! Data files, checksums and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Files produced by a run, held in memory until the single write pass.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    timings: Vec<(String, Duration)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("json values always serialize");
        text.push('\n');
        self.add(name, text);
    }

    pub fn time(&mut self, stage: impl Into<String>, took: Duration) {
        self.timings.push((stage.into(), took));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file, then the manifest, then re-verifies the manifest.
    pub fn write(self, dir: &Path, config_text: &str) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let mut listed = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
            listed.push(json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes) }));
        }
        let timings: serde_json::Map<String, Value> = self
            .timings
            .iter()
            .map(|(stage, d)| (stage.clone(), json!(d.as_secs_f64())))
            .collect();
        let manifest = json!({
            "tool": "chaoscope",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config_text,
            "files": listed,
            "timings_seconds": timings,
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("json values always serialize");
        text.push('\n');
        fs::write(dir.join(MANIFEST), text)?;
        verify_manifest(dir)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// Checks that every file listed in `dir/manifest.json` exists and matches
/// its checksum.
pub fn verify_manifest(dir: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let manifest: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Numerical(format!("manifest is not json: {e}")))?;
    let files = manifest["files"]
        .as_array()
        .ok_or_else(|| CliError::Numerical("manifest has no file list".into()))?;
    for f in files {
        let path = f["path"].as_str().unwrap_or_default();
        let want = f["sha256"].as_str().unwrap_or_default();
        let got = sha256_hex(&fs::read(dir.join(path))?);
        if got != want {
            return Err(CliError::Numerical(format!("{path}: checksum {got} does not match manifest {want}")));
        }
    }
    Ok(())
}

/// CSV text with a header row and `\n` line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{c}").unwrap();
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
