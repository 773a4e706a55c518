//! Serializable run reports, the per-run manifest, and file output helpers.
//!
//! Primary outputs are deterministic: reruns with the same configuration and
//! seed produce byte-identical files. The manifest additionally records a
//! timestamp and the SHA-256 digest of every output it accompanies.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bell::MonteCarloReport;
use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::optics::HeraldClass;
use crate::protocol::HeraldedResult;
use crate::timing::{Schedule, TimingReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Digest entry for one output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Written next to every run's outputs. Identical inputs yield identical
/// output digests; only the timestamp varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: String,
    pub tool_version: String,
    pub rng_seed: Option<u64>,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn io_error(context: &str, err: std::io::Error) -> Error {
    Error::InvalidParameter(format!("{context}: {err}"))
}

/// Serializes `value` as pretty JSON with a trailing newline and writes it.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("serializing {}: {e}", path.display())))?;
    bytes.push(b'\n');
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error("creating output directory", e))?;
    }
    fs::write(path, &bytes).map_err(|e| io_error("writing output", e))?;
    Ok(bytes)
}

/// Writes a CSV file with a header row; fields are joined with commas and
/// never quoted (values are numbers and identifiers).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    writeln!(bytes, "{}", header.join(",")).expect("in-memory write");
    for row in rows {
        writeln!(bytes, "{}", row.join(",")).expect("in-memory write");
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error("creating output directory", e))?;
    }
    fs::write(path, &bytes).map_err(|e| io_error("writing output", e))?;
    Ok(bytes)
}

/// Builds and writes `manifest.json` for a finished run.
pub fn write_manifest(
    out_dir: &Path,
    subcommand: &str,
    rng_seed: Option<u64>,
    config: serde_json::Value,
    outputs: &[(PathBuf, Vec<u8>)],
) -> Result<PathBuf> {
    let timestamp_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = Manifest {
        subcommand: subcommand.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        rng_seed,
        timestamp_unix,
        config,
        outputs: outputs
            .iter()
            .map(|(path, bytes)| OutputDigest {
                path: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string()),
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };
    let path = out_dir.join("manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}

/// JSON form of a density matrix: `[[ [re, im], ... ], ...]`, row-major.
pub fn density_matrix_to_json(rho: &DensityMatrix) -> serde_json::Value {
    let dim = rho.dim();
    let rows: Vec<serde_json::Value> = (0..dim)
        .map(|i| {
            let row: Vec<serde_json::Value> = (0..dim)
                .map(|j| {
                    let z = rho.element(i, j);
                    json!([z.re, z.im])
                })
                .collect();
            json!(row)
        })
        .collect();
    json!(rows)
}

/// Reads a 4×4 ion density matrix back from its JSON form.
pub fn ion_density_matrix_from_json(value: &serde_json::Value) -> Result<DensityMatrix> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::InvalidParameter("density matrix must be an array".into()))?;
    if rows.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rows.len(),
        });
    }
    let mut mat = nalgebra::DMatrix::zeros(4, 4);
    for (i, row) in rows.iter().enumerate() {
        let cols = row.as_array().filter(|c| c.len() == 4).ok_or_else(|| {
            Error::InvalidParameter("density matrix rows must have 4 entries".into())
        })?;
        for (j, cell) in cols.iter().enumerate() {
            let pair = cell
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::InvalidParameter("matrix entries must be [re, im]".into()))?;
            let re = pair[0].as_f64().unwrap_or(f64::NAN);
            let im = pair[1].as_f64().unwrap_or(f64::NAN);
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidParameter(
                    "matrix entries must be finite".into(),
                ));
            }
            mat[(i, j)] = Complex64::new(re, im);
        }
    }
    DensityMatrix::new(Basis::IonPair, mat)
}

/// One herald class in a JSON report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeraldEntry {
    pub class: HeraldClass,
    pub probability: f64,
    pub fidelity_to_target: Option<f64>,
    pub ion_state: serde_json::Value,
}

impl From<&HeraldedResult> for HeraldEntry {
    fn from(result: &HeraldedResult) -> Self {
        Self {
            class: result.class,
            probability: result.probability,
            fidelity_to_target: result.fidelity_to_target,
            ion_state: density_matrix_to_json(&result.ion_state),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeraldReport {
    pub config: serde_json::Value,
    pub results: Vec<HeraldEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChshReport {
    pub config: serde_json::Value,
    pub analytic_s: f64,
    pub monte_carlo: Option<MonteCarloReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub config: serde_json::Value,
    pub pairs_per_second: f64,
    pub pairs_per_minute: f64,
    pub seconds_to_requested_pairs: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingOutput {
    pub config: serde_json::Value,
    pub schedule: Schedule,
    pub report: TimingReport,
    pub max_choice_to_detection_window_s: f64,
    pub min_excitation_to_choice_delay_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomReport {
    pub config: serde_json::Value,
    pub coincidence_probability: f64,
    pub bunched_first_output: f64,
    pub bunched_second_output: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellState;

    #[test]
    fn density_matrix_json_round_trip() {
        let rho = BellState::PsiMinus.density();
        let value = density_matrix_to_json(&rho);
        let back = ion_density_matrix_from_json(&value).unwrap();
        assert!(rho.trace_distance(&back).unwrap() < 1e-15);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(sha256_hex(b"ionherald"), sha256_hex(b"ionherald"),);
        assert_ne!(sha256_hex(b"a"), sha256_hex(b"b"));
    }

    #[test]
    fn malformed_matrix_rejected() {
        let bad = serde_json::json!([[1, 2], [3, 4]]);
        assert!(ion_density_matrix_from_json(&bad).is_err());
    }
}
