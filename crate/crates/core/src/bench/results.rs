use std::fs::OpenOptions;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str =
    "run_id,repetition,method_set,report_included,wall_ms,cpu_ms,peak_mem_bytes,per_method_avg_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub run_id: String,
    pub repetition: usize,
    pub method_set: String,
    pub report_included: bool,
    pub wall_ms: f64,
    pub cpu_ms: f64,
    pub peak_mem_bytes: u64,
    pub per_method_avg_ms: f64,
}

/// Write records as CSV. In append mode the header is only written when the
/// file is new or empty.
pub fn write_results_csv(records: &[BenchmarkRecord], path: &Path, append: bool) -> Result<()> {
    let existing = append && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    if !existing {
        w.write_record(RESULTS_HEADER.split(','))?;
    }
    for r in records {
        w.write_record([
            r.run_id.clone(),
            r.repetition.to_string(),
            r.method_set.clone(),
            r.report_included.to_string(),
            format!("{:.3}", r.wall_ms),
            format!("{:.3}", r.cpu_ms),
            r.peak_mem_bytes.to_string(),
            format!("{:.3}", r.per_method_avg_ms),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<BenchmarkRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if headers != RESULTS_HEADER {
        return Err(Error::Schema(format!("unexpected results header {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
