//! Chunked evaluation of the current window against the full reference.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::dataset::{ReferenceCurrentSplit, Timestamp, TimeSeriesDataset};
use crate::decision::{apply_threshold, band_value, fit_sigma_band, SigmaBand, ThresholdSpec};
use crate::error::{Error, Result};
use crate::methods::{evaluate, MethodId, MethodOutput, MethodParams};
use crate::par::{self, Parallelism};

pub const DEFAULT_CHUNK_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Hour,
    Day,
    Week,
    Month,
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChunkSpec {
    TimePeriod { period: Period },
    Size { size: usize },
    Count { count: usize },
}

impl Default for ChunkSpec {
    fn default() -> Self {
        ChunkSpec::Count {
            count: DEFAULT_CHUNK_COUNT,
        }
    }
}

impl FromStr for ChunkSpec {
    type Err = Error;

    /// `count:N`, `size:N` or `time:hour|day|week|month|quarter`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("invalid chunk spec {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = || arg.parse::<usize>().map_err(|_| bad());
        match kind {
            "count" => Ok(ChunkSpec::Count { count: num()? }),
            "size" => Ok(ChunkSpec::Size { size: num()? }),
            "time" => {
                let period = match arg {
                    "hour" => Period::Hour,
                    "day" => Period::Day,
                    "week" => Period::Week,
                    "month" => Period::Month,
                    "quarter" => Period::Quarter,
                    _ => return Err(bad()),
                };
                Ok(ChunkSpec::TimePeriod { period })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ChunkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChunkSpec::Count { count } => write!(f, "count:{count}"),
            ChunkSpec::Size { size } => write!(f, "size:{size}"),
            ChunkSpec::TimePeriod { period } => {
                let p = match period {
                    Period::Hour => "hour",
                    Period::Day => "day",
                    Period::Week => "week",
                    Period::Month => "month",
                    Period::Quarter => "quarter",
                };
                write!(f, "time:{p}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub key: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub begin: usize,
    pub end: usize,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.begin == self.end
    }
}

fn period_key(t: Timestamp, period: Period) -> String {
    let d = crate::dataset::utc(t);
    match period {
        Period::Hour => format!("{}T{:02}", d.format("%Y-%m-%d"), d.hour()),
        Period::Day => d.format("%Y-%m-%d").to_string(),
        Period::Week => {
            let w = d.iso_week();
            format!("{}-W{:02}", w.year(), w.week())
        }
        Period::Month => d.format("%Y-%m").to_string(),
        Period::Quarter => format!("{}-Q{}", d.year(), d.month0() / 3 + 1),
    }
}

pub fn make_chunks(ds: &TimeSeriesDataset, spec: &ChunkSpec) -> Result<Vec<Chunk>> {
    let n = ds.row_count();
    if n == 0 {
        return Err(Error::InsufficientData("cannot chunk an empty dataset".into()));
    }
    let chunk = |key: String, begin: usize, end: usize| Chunk {
        key,
        start_time: ds.time[begin],
        end_time: ds.time[end - 1],
        begin,
        end,
    };
    let ranges: Vec<Chunk> = match *spec {
        ChunkSpec::Count { count } => {
            if count == 0 || count > n {
                return Err(Error::InvalidArgument(format!(
                    "chunk count {count} invalid for {n} rows"
                )));
            }
            let size = n / count;
            (0..count)
                .map(|i| {
                    let end = if i + 1 == count { n } else { (i + 1) * size };
                    chunk(format!("chunk_{i}"), i * size, end)
                })
                .collect()
        }
        ChunkSpec::Size { size } => {
            if size == 0 || size > n {
                return Err(Error::InvalidArgument(format!(
                    "chunk size {size} invalid for {n} rows"
                )));
            }
            (0..n.div_ceil(size))
                .map(|i| chunk(format!("chunk_{i}"), i * size, ((i + 1) * size).min(n)))
                .collect()
        }
        ChunkSpec::TimePeriod { period } => {
            let mut out = Vec::new();
            let mut begin = 0;
            let mut key = period_key(ds.time[0], period);
            for i in 1..n {
                let k = period_key(ds.time[i], period);
                if k != key {
                    out.push(chunk(std::mem::replace(&mut key, k), begin, i));
                    begin = i;
                }
            }
            out.push(chunk(key, begin, n));
            out
        }
    };
    Ok(ranges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkResult {
    pub chunk: Chunk,
    pub variable: String,
    pub method: MethodId,
    /// `None` when the chunk could not be evaluated.
    pub output: Option<MethodOutput>,
    pub drift_flag: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ChunkResult {
    pub fn is_evaluable(&self) -> bool {
        self.drift_flag.is_some()
    }
}

/// Per-chunk results of one (variable, method) pair plus the fitted band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkedDetection {
    pub variable: String,
    pub method: MethodId,
    pub threshold: ThresholdSpec,
    pub band: Option<SigmaBand>,
    pub reference_stats: Vec<f64>,
    pub results: Vec<ChunkResult>,
}

impl ChunkedDetection {
    pub fn ratio(&self) -> Result<f64> {
        chunk_drift_ratio(&self.results)
    }
}

/// Method actually run per chunk: exact KS gives way to the binned
/// approximation once the reference exceeds `ks_exact_cutoff` rows.
pub fn chunk_method(method: MethodId, reference_len: usize, ks_exact_cutoff: usize) -> MethodId {
    if method == MethodId::Ks && reference_len > ks_exact_cutoff {
        MethodId::KsApprox
    } else {
        method
    }
}

/// Evaluate `method` between the full reference column and each chunk of the
/// current window. Band thresholds are first fitted on the reference cut
/// with the same spec, each reference chunk compared to the full reference.
#[allow(clippy::too_many_arguments)]
pub fn chunked_detect(
    split: &ReferenceCurrentSplit,
    variable: &str,
    method: MethodId,
    spec: &ChunkSpec,
    threshold: &ThresholdSpec,
    params: &MethodParams,
    ks_exact_cutoff: usize,
    mode: Parallelism,
) -> Result<ChunkedDetection> {
    if method.is_frame_level() {
        return Err(Error::InvalidArgument(format!(
            "{method} is frame-level and cannot be chunked per variable"
        )));
    }
    threshold.validate()?;
    let (reference, current) = split.variable(variable)?;
    let dtype = split.reference.column(variable)?.dtype;
    let method = chunk_method(method, reference.len(), ks_exact_cutoff);
    let run = |values: &[f64]| -> Result<Option<MethodOutput>> {
        match evaluate(method, reference, values, params, dtype) {
            Ok(o) => Ok(Some(o)),
            Err(e) if e.is_unevaluable() => Ok(None),
            Err(e) => Err(e),
        }
    };

    let (band, reference_stats) = if threshold.needs_band() {
        let ref_chunks = make_chunks(&split.reference, spec)?;
        let outs = par::map(&ref_chunks, mode, |c| run(&reference[c.begin..c.end]));
        let mut stats = Vec::new();
        for o in outs {
            if let Some(o) = o? {
                stats.push(band_value(&o));
            }
        }
        let factor = match *threshold {
            ThresholdSpec::SigmaBand { factor } => factor,
            _ => unreachable!("only sigma bands need fitting"),
        };
        (Some(fit_sigma_band(&stats, factor)?), stats)
    } else {
        (None, Vec::new())
    };

    let chunks = make_chunks(&split.current, spec)?;
    let evaluated = par::map(&chunks, mode, |c| {
        let out = match evaluate(method, reference, &current[c.begin..c.end], params, dtype) {
            Ok(o) => o,
            Err(e) if e.is_unevaluable() => return Ok((None, None, Some(e.to_string()))),
            Err(e) => return Err(e),
        };
        let flag = apply_threshold(&out, threshold, band.as_ref())?;
        Ok((Some(out), Some(flag), None))
    });
    let mut results = Vec::with_capacity(chunks.len());
    for (chunk, r) in chunks.into_iter().zip(evaluated) {
        let (output, drift_flag, note) = r?;
        results.push(ChunkResult {
            chunk,
            variable: variable.to_string(),
            method,
            output,
            drift_flag,
            note,
        });
    }
    Ok(ChunkedDetection {
        variable: variable.to_string(),
        method,
        threshold: *threshold,
        band,
        reference_stats,
        results,
    })
}

/// Flagged share among evaluable chunks.
pub fn chunk_drift_ratio(results: &[ChunkResult]) -> Result<f64> {
    let evaluable: Vec<bool> = results.iter().filter_map(|r| r.drift_flag).collect();
    if evaluable.is_empty() {
        return Err(Error::InsufficientData("no evaluable chunks".into()));
    }
    Ok(evaluable.iter().filter(|f| **f).count() as f64 / evaluable.len() as f64)
}

/// Variable-level verdict: drift in at least half of the evaluable chunks.
pub fn chunk_verdict(ratio: f64) -> bool {
    ratio >= crate::decision::DEFAULT_CHUNK_RATIO
}
