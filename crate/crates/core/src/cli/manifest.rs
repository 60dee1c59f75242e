//! CSV tables and the run manifest.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

/// A CSV table: header plus string rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// File-name suffix, e.g. `certificate`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC-4180 text with a header row.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Record of one CLI run. Timestamps live here so CSV bodies stay
/// reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// SHA-256 of the canonical configuration, seed and grid scale.
    pub config_hash: String,
    pub seed: u64,
    pub grid_scale: f64,
    pub jobs: usize,
    pub started_unix_secs: u64,
    pub finished_unix_secs: u64,
    pub outputs: Vec<String>,
    pub checks: usize,
    pub failures: usize,
    pub passed: bool,
}

/// Seconds since the Unix epoch.
pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Hex SHA-256 of `text`.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `dir/file`, returning the file name.
pub fn write_file(dir: &Path, file: &str, contents: &str) -> Result<String, CliError> {
    fs::write(dir.join(file), contents)?;
    Ok(file.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["plain".into(), "has,comma \"q\"".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\r\nplain,\"has,comma \"\"q\"\"\"\r\n");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
