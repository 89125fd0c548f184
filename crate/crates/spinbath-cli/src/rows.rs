//! Row schemas and deterministic file output.
//!
//! CSV files carry a header row (RFC 4180 quoting via the `csv` crate);
//! JSON output is an array of row objects. Undefined cells are empty (CSV)
//! or null (JSON), never fabricated numbers; the `flag` column says why.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Why a sample carries empty cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Ok,
    SingularMap,
    PureState,
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub flag: Flag,
}

#[derive(Debug, Serialize)]
pub struct RatesRow {
    pub t: f64,
    pub gamma_dis: Option<f64>,
    pub gamma_abs: Option<f64>,
    pub gamma_deph: Option<f64>,
    pub u: Option<f64>,
    pub flag: Flag,
}

#[derive(Debug, Serialize)]
pub struct NonmarkovRow {
    pub t: f64,
    pub q_dis: Option<f64>,
    pub q_deph: Option<f64>,
    pub q: Option<f64>,
    pub d: f64,
    pub p: Option<f64>,
    pub flag: Flag,
}

#[derive(Debug, Serialize)]
pub struct ThermoRow {
    pub t: f64,
    pub gamma_dis: Option<f64>,
    pub entropy: f64,
    pub sigma: Option<f64>,
    /// One-sided limit of sigma at pure-state samples: "inf", "-inf", or "0".
    pub sigma_limit: Option<String>,
    pub bloch_x: f64,
    pub purity: f64,
    pub purity_rate: f64,
    pub flag: Flag,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub alpha: f64,
    pub eta: f64,
    pub g_measure: f64,
    pub blp_lower_bound: f64,
    pub phi: f64,
    pub min_gamma_dis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn encode<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            Ok(w.into_inner()?)
        }
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(rows)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Write rows to the path (atomically: temp file then rename) or to stdout
/// when no path is given.
pub fn write_rows<T: Serialize>(out: Option<&Path>, format: Format, rows: &[T]) -> Result<()> {
    let bytes = encode(rows, format)?;
    match out {
        Some(path) => atomic_write(path, &bytes),
        None => {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = tmp_path(path);
    let write = || -> Result<()> {
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
        Ok(())
    };
    let result = write();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Remove a partially written output on command failure.
pub fn cleanup_partial(out: Option<&Path>) {
    if let Some(path) = out {
        let _ = fs::remove_file(tmp_path(path));
    }
}
