//! Writes scenario tables as CSV or JSON and records the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::scenarios::{ConvergenceEntry, ScenarioData, Table};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

/// Everything about a run that is not in the data files themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub version: String,
    pub wall_time_seconds: f64,
    pub converged: bool,
    pub convergence: Vec<ConvergenceEntry>,
    pub outputs: Vec<FileDigest>,
}

/// Body of the JSON data file. Holds every CSV table, so nothing is lost by
/// choosing JSON; only wall time and digests live solely in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFile {
    pub scenario: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub convergence: Vec<ConvergenceEntry>,
    pub tables: Vec<Table>,
}

/// Shortest round-trip formatting (exponent form for tiny magnitudes), so
/// CSV cells parse back exactly.
pub fn to_csv(table: &Table) -> Vec<u8> {
    const IN_MEMORY: &str = "writing CSV to memory";
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect(IN_MEMORY);
    for row in &table.rows {
        w.write_record(row.iter().map(|cell| cell.map_or_else(String::new, |v| format!("{v:?}"))))
            .expect(IN_MEMORY);
    }
    w.into_inner().expect(IN_MEMORY)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: String, bytes: &[u8], digests: &mut Vec<FileDigest>) -> std::io::Result<()> {
    fs::write(dir.join(&name), bytes)?;
    digests.push(FileDigest {
        file: name,
        sha256: sha256_hex(bytes),
    });
    Ok(())
}

/// Writes the data files into `cfg.out_dir` and returns their digests in
/// the order written.
pub fn write_data(cfg: &ExperimentConfig, data: &ScenarioData) -> std::io::Result<Vec<FileDigest>> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    let mut digests = Vec::new();
    match cfg.format {
        Format::Csv => {
            for table in &data.tables {
                write_file(dir, format!("{}.csv", table.name), &to_csv(table), &mut digests)?;
            }
        }
        Format::Json => {
            let body = DataFile {
                scenario: cfg.scenario.to_string(),
                version: VERSION.to_string(),
                config: cfg.clone(),
                convergence: data.convergence.clone(),
                tables: data.tables.clone(),
            };
            let mut text = serde_json::to_string_pretty(&body).map_err(std::io::Error::other)?;
            text.push('\n');
            write_file(dir, format!("{}.json", cfg.scenario), text.as_bytes(), &mut digests)?;
        }
    }
    Ok(digests)
}

pub fn write_manifest(manifest: &RunManifest) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(manifest.out_dir.join(MANIFEST_FILE), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_values_and_blanks() {
        let table = Table {
            name: "t".into(),
            columns: vec!["n".into(), "x".into()],
            rows: vec![vec![Some(2.0), Some(0.1 + 0.2)], vec![Some(3.0), None]],
        };
        let text = String::from_utf8(to_csv(&table)).unwrap();
        assert_eq!(text, "n,x\n2.0,0.30000000000000004\n3.0,\n");
        let cell: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(cell, 0.1 + 0.2);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
