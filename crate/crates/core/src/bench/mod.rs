//! Measurement harness: repeated, sequential detection runs with wall time,
//! process CPU time and allocator peak memory per repetition.

pub mod alloc;
mod results;

use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::ReferenceCurrentSplit;
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::pipeline::{detect, DetectConfig, DriftReport};
use crate::report::{plot_bundle, to_sorted_json};

pub use alloc::TrackingAllocator;
pub use results::{read_results_csv, write_results_csv, BenchmarkRecord, RESULTS_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    #[default]
    DetectOnly,
    WithReport,
    /// Both variants from the same repetition: the report figure is the
    /// detection lap plus the report lap.
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPlan {
    pub run_id: String,
    pub method_set: String,
    pub detect: DetectConfig,
    pub repetitions: usize,
    pub report: ReportMode,
}

impl BenchmarkPlan {
    pub fn new(run_id: impl Into<String>, detect: DetectConfig) -> Self {
        let method_set = detect
            .methods
            .iter()
            .map(|m| m.as_str())
            .collect::<Vec<_>>()
            .join("+");
        Self {
            run_id: run_id.into(),
            method_set,
            detect,
            repetitions: 5,
            report: ReportMode::DetectOnly,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub records: Vec<BenchmarkRecord>,
    /// One detection checksum per timed repetition.
    pub checksums: Vec<u64>,
    pub warnings: Vec<String>,
}

fn cpu_time_ms() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: ts is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return f64::NAN;
    }
    ts.tv_sec as f64 * 1e3 + ts.tv_nsec as f64 / 1e6
}

/// Resolution of the monotonic clock in milliseconds.
pub fn clock_resolution_ms() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: ts is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_getres(libc::CLOCK_MONOTONIC, &mut ts) };
    if rc != 0 {
        return f64::INFINITY;
    }
    ts.tv_sec as f64 * 1e3 + ts.tv_nsec as f64 / 1e6
}

struct Lap {
    wall_ms: f64,
    cpu_ms: f64,
    peak: u64,
}

fn measure<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Lap)> {
    let base = alloc::reset_peak();
    let cpu0 = cpu_time_ms();
    let t0 = Instant::now();
    let out = f()?;
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let cpu_ms = cpu_time_ms() - cpu0;
    let peak = alloc::peak_bytes().saturating_sub(base) as u64;
    Ok((out, Lap { wall_ms, cpu_ms, peak }))
}

fn render(report: &DriftReport) -> Result<usize> {
    let json = to_sorted_json(report)?;
    let bundle = to_sorted_json(&plot_bundle(report))?;
    Ok(black_box(json.len() + bundle.len()))
}

fn record(plan: &BenchmarkPlan, rep: usize, report_included: bool, lap: &Lap) -> BenchmarkRecord {
    let n = plan.detect.methods.len() as f64;
    // per-method average in whole microseconds; wall is defined from it
    let per_method_avg_ms = (lap.wall_ms / n * 1e3).round() / 1e3;
    BenchmarkRecord {
        run_id: plan.run_id.clone(),
        repetition: rep,
        method_set: plan.method_set.clone(),
        report_included,
        wall_ms: per_method_avg_ms * n,
        cpu_ms: lap.cpu_ms,
        peak_mem_bytes: lap.peak,
        per_method_avg_ms,
    }
}

/// One warm-up pass, then `repetitions` timed passes, all sequential.
pub fn run_benchmark(plan: &BenchmarkPlan, split: &ReferenceCurrentSplit) -> Result<BenchmarkOutcome> {
    if plan.repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    if plan.detect.methods.is_empty() {
        return Err(Error::InvalidArgument("method set is empty".into()));
    }
    let mut cfg = plan.detect.clone();
    cfg.parallelism = Parallelism::Sequential;

    let mut warnings = Vec::new();
    let res = clock_resolution_ms();
    if res > 1.0 {
        warnings.push(format!("clock resolution {res} ms is coarser than 1 ms"));
    }
    if !alloc::is_active() {
        warnings.push("tracking allocator not installed; peak memory reported as 0".into());
    }

    let warm = detect(split, &cfg, None)?;
    if plan.report != ReportMode::DetectOnly {
        render(&warm)?;
    }
    drop(warm);

    let mut records = Vec::new();
    let mut checksums = Vec::new();
    for rep in 1..=plan.repetitions {
        let (report, lap) = measure(|| detect(split, &cfg, None))?;
        checksums.push(black_box(report.checksum()));
        match plan.report {
            ReportMode::DetectOnly => records.push(record(plan, rep, false, &lap)),
            ReportMode::WithReport | ReportMode::Both => {
                let (_, extra) = measure(|| render(&report))?;
                let combined = Lap {
                    wall_ms: lap.wall_ms + extra.wall_ms,
                    cpu_ms: lap.cpu_ms + extra.cpu_ms,
                    peak: lap.peak.max(extra.peak),
                };
                if plan.report == ReportMode::Both {
                    records.push(record(plan, rep, false, &lap));
                }
                records.push(record(plan, rep, true, &combined));
            }
        }
    }
    Ok(BenchmarkOutcome {
        records,
        checksums,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("no values to aggregate".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { mean, min, max, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method_set: String,
    pub report_included: bool,
    pub runs: usize,
    pub wall_ms: Stats,
    pub cpu_ms: Stats,
    pub peak_mem_bytes: Stats,
    pub per_method_avg_ms: Stats,
}

/// Group by (method set, report flag) in first-seen order.
pub fn aggregate(records: &[BenchmarkRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no benchmark records".into()));
    }
    let mut order: Vec<(String, bool)> = Vec::new();
    let mut groups: BTreeMap<(String, bool), Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.method_set.clone(), r.report_included);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let col = |f: fn(&BenchmarkRecord) -> f64| g.iter().map(|r| f(r)).collect::<Vec<_>>();
            Ok(SummaryRow {
                method_set: key.0,
                report_included: key.1,
                runs: g.len(),
                wall_ms: Stats::of(&col(|r| r.wall_ms))?,
                cpu_ms: Stats::of(&col(|r| r.cpu_ms))?,
                peak_mem_bytes: Stats::of(&col(|r| r.peak_mem_bytes as f64))?,
                per_method_avg_ms: Stats::of(&col(|r| r.per_method_avg_ms))?,
            })
        })
        .collect()
}

/// Plain-text table for the console.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<24} {:>6} {:>4} {:>12} {:>10} {:>10} {:>12} {:>14}\n",
        "method_set", "report", "n", "wall_mean", "wall_min", "wall_max", "wall_sigma", "peak_mem_mean"
    );
    for r in rows {
        let label = if r.method_set.len() > 24 {
            format!("{}...", &r.method_set[..21])
        } else {
            r.method_set.clone()
        };
        s.push_str(&format!(
            "{:<24} {:>6} {:>4} {:>12.3} {:>10.3} {:>10.3} {:>12.3} {:>14.0}\n",
            label,
            r.report_included,
            r.runs,
            r.wall_ms.mean,
            r.wall_ms.min,
            r.wall_ms.max,
            r.wall_ms.std,
            r.peak_mem_bytes.mean
        ));
    }
    s
}
