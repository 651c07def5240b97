//! Output-directory plumbing: JSON reports with sorted keys, CSV field
//! dumps, SHA-256 checksums, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Serializes through `serde_json::Value`, whose object representation is a
/// sorted map — every report therefore has deterministically ordered keys.
pub fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value renders");
    s.push('\n');
    s.into_bytes()
}

/// Collects the files and phase timings of one run directory and writes the
/// closing `manifest.json`. The manifest carries wall-clock timings and is
/// the one artifact excluded from the byte-identical determinism contract.
pub struct RunWriter {
    dir: PathBuf,
    files: BTreeMap<String, String>,
    phases_ms: BTreeMap<String, f64>,
    started: Instant,
}

impl RunWriter {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
            phases_ms: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        self.files.insert(name.to_string(), sha256_hex(bytes));
        fs::write(self.dir.join(name), bytes)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> io::Result<()> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> io::Result<()> {
        self.write_bytes(name, &json_bytes(value))
    }

    /// Records the wall-clock duration of a named phase (milliseconds since
    /// the previous phase mark or construction).
    pub fn mark_phase(&mut self, name: &str) {
        let elapsed = self.started.elapsed().as_secs_f64() * 1e3;
        let already: f64 = self.phases_ms.values().sum();
        self.phases_ms.insert(name.to_string(), elapsed - already);
    }

    pub fn finish(self, command: &str, config_echo: &str, seed: u64) -> io::Result<()> {
        let manifest = json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config_echo,
            "seed": seed,
            "phases_ms": self.phases_ms,
            "files": self.files,
        });
        fs::write(self.dir.join("manifest.json"), json_bytes(&manifest))
    }
}

/// Reads a JSON file into a `Value`.
pub fn read_json(path: &Path) -> Result<Value, String> {
    let bytes =
        fs::read(path).map_err(|e| format!("cannot read '{}': {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| format!("malformed JSON '{}': {e}", path.display()))
}
