//! Output files and their manifests.
//!
//! Data files are pure functions of the configuration and seed. Everything
//! that is not — the wall-clock timestamp and the thread count — lives only
//! in the manifest, which also records the SHA-256 digest of every data file
//! written by the run.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::lattice::ScanResult;

/// Format version of the CSV and JSON outputs.
pub const SCHEMA_VERSION: u32 = 1;

/// Formats a number with 17 significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// Tabular form of a scan: a header row, then one row per grid point in
/// grid order. Absent metrics are empty fields.
pub fn scan_csv(scan: &ScanResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(scan.header()).map_err(io)?;
    for r in &scan.rows {
        w.write_record([
            sci(r.knob),
            opt(r.gate_time),
            opt(r.infidelity),
            opt(r.phase),
            opt(r.phase_error),
            opt(r.leakage),
            opt(r.primary_infidelity),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// One data file named by a manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Everything needed to rerun a subcommand and check its outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub threads: usize,
    /// UTC time of the run (RFC 3339); the only non-reproducible field.
    pub timestamp: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputFile>,
}

/// Writes data files into a directory and then a manifest naming them.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Writes `<subcommand>.manifest.json` and returns its path.
    pub fn finish(
        self,
        subcommand: &str,
        config: &ExperimentConfig,
        threads: usize,
    ) -> Result<PathBuf> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: SCHEMA_VERSION,
            seed: config.seed,
            threads,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.clone(),
            outputs: self.files,
        };
        let path = self.dir.join(format!("{subcommand}.manifest.json"));
        std::fs::write(&path, json_bytes(&manifest)?)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ScanBase, ScanGate, ScanKnob, ScanRow};

    #[test]
    fn numbers_round_trip_through_the_text_form() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.5e-300,
            std::f64::consts::PI,
        ] {
            let s = sci(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa = s
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn scan_csv_has_header_and_empty_absent_fields() {
        let row = ScanRow {
            knob: 0.5,
            gate_time: Some(1.0),
            infidelity: None,
            phase: None,
            phase_error: None,
            leakage: Some(0.0),
            primary_infidelity: None,
            error: Some("failed, badly".into()),
        };
        let scan = ScanResult {
            gate: ScanGate::Rz,
            knob: ScanKnob::UOverJ,
            base: ScanBase::default(),
            rows: vec![row],
        };
        let text = String::from_utf8(scan_csv(&scan).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("UoverJ,gate_time"));
        assert_eq!(
            lines[1],
            "5.0000000000000000e-1,1.0000000000000000e0,,,,0.0000000000000000e0,,\"failed, badly\""
        );
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
