//! CSV writers for density-matrix time series, run manifests, and the
//! content hash of a configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::Operator4;

/// Version tag of the CSV column layouts, recorded in every manifest.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Element labels `11`, `12`, …, `44` (1-based, row-major).
pub fn element_labels() -> Vec<String> {
    (1..=4).flat_map(|i| (1..=4).map(move |j| format!("{i}{j}"))).collect()
}

/// Header of an RDM series: `t`, `rho{ij}_re`, `rho{ij}_im` for the 16
/// entries, optionally `se{ij}` for each entry, then any extra columns.
pub fn rdm_header(with_stderr: bool, extra: &[&str]) -> Vec<String> {
    let labels = element_labels();
    let mut h = vec!["t".to_string()];
    for l in &labels {
        h.push(format!("rho{l}_re"));
        h.push(format!("rho{l}_im"));
    }
    if with_stderr {
        h.extend(labels.iter().map(|l| format!("se{l}")));
    }
    h.extend(extra.iter().map(|s| s.to_string()));
    h
}

/// One row matching [`rdm_header`].
pub fn rdm_row(t: f64, rho: &Operator4, stderr: Option<&[f64; 16]>, extra: &[f64]) -> Vec<String> {
    let mut row = vec![fmt_f64(t)];
    for i in 0..4 {
        for j in 0..4 {
            row.push(fmt_f64(rho[(i, j)].re));
            row.push(fmt_f64(rho[(i, j)].im));
        }
    }
    if let Some(se) = stderr {
        row.extend(se.iter().map(|&v| fmt_f64(v)));
    }
    row.extend(extra.iter().map(|&v| fmt_f64(v)));
    row
}

/// Shortest round-trip decimal representation (no thousands separators).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Write a table given as header plus rows.
pub fn write_table<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// SHA-256 over git blob framing: `"blob <len>\0" + bytes`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical JSON text (keys sorted, no whitespace) of a serializable value.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value keeps object keys in sorted order
    let v = serde_json::to_value(value).map_err(|e| crate::Error::Config(e.to_string()))?;
    Ok(v.to_string())
}

/// `out.csv` → `out.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

/// Write a pretty-printed JSON document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Config(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
