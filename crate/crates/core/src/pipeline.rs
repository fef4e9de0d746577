//! Whole-run detection: every (variable, method) pair, thresholds, alarms,
//! optional ground-truth grouping and confidence-based accuracy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chunking::{chunk_verdict, chunked_detect, make_chunks, ChunkSpec};
use crate::dataset::{Dtype, ReferenceCurrentSplit, Role, Timestamp};
use crate::decision::{
    apply_threshold, cbpe_accuracy, classify_group, dataset_alarm, Group, GroundTruthDriftSpec,
    SigmaBand, ThresholdSpec, DEFAULT_CBPE_THRESHOLD, DEFAULT_SHARE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::methods::{
    evaluate, shared_histogram, spot_the_difference, table_methods, MethodId, MethodParams,
    SharedHistogram, ValueKind,
};
use crate::par::{self, Parallelism};

pub const KS_EXACT_CUTOFF: usize = 10_000;
pub const MAX_SERIES_BUCKETS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub methods: Vec<MethodId>,
    pub params: MethodParams,
    /// Per-method overrides of the default thresholds.
    pub thresholds: BTreeMap<MethodId, ThresholdSpec>,
    pub chunks: Option<ChunkSpec>,
    pub weights: BTreeMap<String, f64>,
    pub share_threshold: f64,
    pub seed: u64,
    pub ks_exact_cutoff: usize,
    pub cbpe_threshold: f64,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            methods: table_methods(),
            params: MethodParams::default(),
            thresholds: BTreeMap::new(),
            chunks: None,
            weights: BTreeMap::new(),
            share_threshold: DEFAULT_SHARE_THRESHOLD,
            seed: 0,
            ks_exact_cutoff: KS_EXACT_CUTOFF,
            cbpe_threshold: DEFAULT_CBPE_THRESHOLD,
            parallelism: Parallelism::Parallel,
        }
    }
}

impl DetectConfig {
    pub fn threshold_for(&self, method: MethodId) -> ThresholdSpec {
        if let Some(t) = self.thresholds.get(&method) {
            return *t;
        }
        if self.chunks.is_some() {
            ThresholdSpec::chunked_default_for(method)
        } else {
            ThresholdSpec::default_for(method)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkPoint {
    pub key: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub value: Option<f64>,
    pub drift: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: MethodId,
    /// `None` for frame-level results.
    pub variable: Option<String>,
    pub statistic: Option<f64>,
    pub drift_value: Option<f64>,
    pub value_kind: ValueKind,
    pub threshold: ThresholdSpec,
    /// `None` when the method could not be evaluated.
    pub drift: Option<bool>,
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<SigmaBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunks: Option<Vec<ChunkPoint>>,
    /// Method actually run when it differs from the requested one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluated_as: Option<MethodId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub start: Timestamp,
    pub end: Timestamp,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableProfile {
    pub reference_mean: f64,
    pub reference_std: f64,
    pub current_mean: f64,
    pub current_std: f64,
    /// The histogram the binned divergences use, if it could be built.
    pub histogram: Option<SharedHistogram>,
    /// Bucketed current-window values.
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableReport {
    pub name: String,
    pub role: Role,
    pub dtype: Dtype,
    pub results: Vec<MethodResult>,
    /// Majority of the available method verdicts.
    pub drift: Option<bool>,
    pub profile: VariableProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodId,
    pub share: Option<f64>,
    pub alarm: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Group>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbpeChunk {
    pub key: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub estimate: f64,
    pub alarm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub column: String,
    pub threshold: f64,
    pub reference_estimate: f64,
    pub estimate: f64,
    pub alarm: bool,
    pub chunks: Vec<CbpeChunk>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub dataset: String,
    pub split_timestamp: Timestamp,
    pub seed: u64,
    pub chunking: Option<ChunkSpec>,
    pub variables: Vec<VariableReport>,
    pub dataset_results: Vec<MethodResult>,
    pub method_summary: Vec<MethodSummary>,
    pub share: f64,
    pub alarm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<BTreeMap<MethodId, Group>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub performance: Option<PerformanceReport>,
}

impl DriftReport {
    pub fn variable(&self, name: &str) -> Option<&VariableReport> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn result(&self, variable: &str, method: MethodId) -> Option<&MethodResult> {
        self.variable(variable)?.results.iter().find(|r| r.method == method)
    }

    pub fn summary(&self, method: MethodId) -> Option<&MethodSummary> {
        self.method_summary.iter().find(|s| s.method == method)
    }

    /// Cheap fingerprint of the numeric outcome, used to keep benchmark runs honest.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for r in self.variables.iter().flat_map(|v| &v.results).chain(&self.dataset_results) {
            mix(r.drift_value.unwrap_or(f64::NAN).to_bits());
            mix(r.drift.map_or(2, u64::from));
        }
        mix(self.share.to_bits());
        h
    }
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
}

fn series(times: &[Timestamp], values: &[f64]) -> Vec<SeriesPoint> {
    let n = values.len();
    let buckets = n.min(MAX_SERIES_BUCKETS);
    (0..buckets)
        .map(|b| {
            let lo = b * n / buckets;
            let hi = (b + 1) * n / buckets;
            SeriesPoint {
                start: times[lo],
                end: times[hi - 1],
                mean: values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64,
            }
        })
        .collect()
}

fn whole_result(
    method: MethodId,
    variable: &str,
    reference: &[f64],
    current: &[f64],
    dtype: Dtype,
    threshold: ThresholdSpec,
    params: &MethodParams,
) -> Result<MethodResult> {
    let mut res = MethodResult {
        method,
        variable: Some(variable.to_string()),
        statistic: None,
        drift_value: None,
        value_kind: method.value_kind(),
        threshold,
        drift: None,
        degenerate: false,
        error: None,
        chunk_ratio: None,
        band: None,
        chunks: None,
        evaluated_as: None,
    };
    match evaluate(method, reference, current, params, dtype) {
        Ok(out) => {
            res.drift = Some(apply_threshold(&out, &threshold, None)?);
            res.statistic = Some(out.statistic);
            res.drift_value = Some(out.drift_value);
            res.degenerate = out.degenerate;
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    Ok(res)
}

/// The number `threshold` compares for this output.
pub fn threshold_value(out: &crate::methods::MethodOutput, threshold: &ThresholdSpec) -> f64 {
    match threshold {
        ThresholdSpec::PLeft { .. } | ThresholdSpec::DistanceRight { .. } => out.drift_value,
        _ => crate::decision::band_value(out),
    }
}

fn chunked_result(
    split: &ReferenceCurrentSplit,
    method: MethodId,
    variable: &str,
    spec: &ChunkSpec,
    threshold: ThresholdSpec,
    cfg: &DetectConfig,
) -> Result<MethodResult> {
    let det = match chunked_detect(
        split,
        variable,
        method,
        spec,
        &threshold,
        &cfg.params,
        cfg.ks_exact_cutoff,
        cfg.parallelism,
    ) {
        Ok(d) => d,
        Err(e @ (Error::IncompatibleThreshold { .. } | Error::ColumnNotFound(_))) => return Err(e),
        Err(e) => {
            return Ok(MethodResult {
                method,
                variable: Some(variable.to_string()),
                statistic: None,
                drift_value: None,
                value_kind: method.value_kind(),
                threshold,
                drift: None,
                degenerate: false,
                error: Some(e.to_string()),
                chunk_ratio: None,
                band: None,
                chunks: None,
                evaluated_as: None,
            })
        }
    };
    let ratio = det.ratio().ok();
    let points = det
        .results
        .iter()
        .map(|r| ChunkPoint {
            key: r.chunk.key.clone(),
            start_time: r.chunk.start_time,
            end_time: r.chunk.end_time,
            value: r.output.map(|o| threshold_value(&o, &threshold)),
            drift: r.drift_flag,
        })
        .collect();
    Ok(MethodResult {
        method,
        variable: Some(variable.to_string()),
        statistic: None,
        drift_value: ratio,
        value_kind: det.method.value_kind(),
        threshold,
        drift: ratio.map(chunk_verdict),
        degenerate: det.results.iter().any(|r| r.output.is_some_and(|o| o.degenerate)),
        error: if ratio.is_none() {
            Some("no evaluable chunks".into())
        } else {
            None
        },
        chunk_ratio: ratio,
        band: det.band,
        chunks: Some(points),
        evaluated_as: (det.method != method).then_some(det.method),
    })
}

fn frame_result(split: &ReferenceCurrentSplit, cfg: &DetectConfig) -> Result<MethodResult> {
    let method = MethodId::SpotTheDifference;
    let threshold = cfg.threshold_for(method);
    let cols = |ds: &crate::dataset::TimeSeriesDataset| -> Vec<Vec<f64>> {
        ds.monitored_columns().map(|c| c.values.clone()).collect()
    };
    let r = cols(&split.reference);
    let c = cols(&split.current);
    let rs: Vec<&[f64]> = r.iter().map(Vec::as_slice).collect();
    let cs: Vec<&[f64]> = c.iter().map(Vec::as_slice).collect();
    let mut res = MethodResult {
        method,
        variable: None,
        statistic: None,
        drift_value: None,
        value_kind: method.value_kind(),
        threshold,
        drift: None,
        degenerate: false,
        error: None,
        chunk_ratio: None,
        band: None,
        chunks: None,
        evaluated_as: None,
    };
    match spot_the_difference(&rs, &cs, &cfg.params.spot, cfg.seed) {
        Ok(out) => {
            res.drift = Some(apply_threshold(&out, &threshold, None)?);
            res.statistic = Some(out.statistic);
            res.drift_value = Some(out.drift_value);
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    Ok(res)
}

fn performance(split: &ReferenceCurrentSplit, cfg: &DetectConfig) -> Result<Option<PerformanceReport>> {
    let Some(col) = split.current.columns_with_role(Role::Prediction).next() else {
        return Ok(None);
    };
    let reference = &split.reference.column(&col.name)?.values;
    let (reference_estimate, _) = cbpe_accuracy(reference, cfg.cbpe_threshold)?;
    let (estimate, alarm) = cbpe_accuracy(&col.values, cfg.cbpe_threshold)?;
    let spec = cfg.chunks.unwrap_or_default();
    let mut chunks = Vec::new();
    for c in make_chunks(&split.current, &spec)? {
        let (e, a) = cbpe_accuracy(&col.values[c.begin..c.end], cfg.cbpe_threshold)?;
        chunks.push(CbpeChunk {
            key: c.key,
            start_time: c.start_time,
            end_time: c.end_time,
            estimate: e,
            alarm: a,
        });
    }
    Ok(Some(PerformanceReport {
        column: col.name.clone(),
        threshold: cfg.cbpe_threshold,
        reference_estimate,
        estimate,
        alarm,
        chunks,
    }))
}

/// Run every configured method over every monitored variable.
pub fn detect(
    split: &ReferenceCurrentSplit,
    cfg: &DetectConfig,
    truth: Option<&GroundTruthDriftSpec>,
) -> Result<DriftReport> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods selected".into()));
    }
    for m in &cfg.methods {
        cfg.threshold_for(*m).validate()?;
    }
    let variables: Vec<_> = split.reference.monitored_columns().collect();
    if variables.is_empty() {
        return Err(Error::Schema("no input or target columns to monitor".into()));
    }
    let per_var: Vec<MethodId> = cfg.methods.iter().copied().filter(|m| !m.is_frame_level()).collect();
    let pairs: Vec<(usize, MethodId)> = (0..variables.len())
        .flat_map(|v| per_var.iter().map(move |m| (v, *m)))
        .collect();
    let computed = par::map(&pairs, cfg.parallelism, |&(v, m)| {
        let col = variables[v];
        let threshold = cfg.threshold_for(m);
        match &cfg.chunks {
            Some(spec) => chunked_result(split, m, &col.name, spec, threshold, cfg),
            None => {
                let (r, c) = split.variable(&col.name)?;
                whole_result(m, &col.name, r, c, col.dtype, threshold, &cfg.params)
            }
        }
    });
    let mut computed = computed.into_iter();

    let mut reports = Vec::with_capacity(variables.len());
    for col in &variables {
        let mut results = Vec::with_capacity(per_var.len());
        for _ in 0..per_var.len() {
            results.push(computed.next().expect("one result per pair")?);
        }
        let flags: Vec<bool> = results.iter().filter_map(|r| r.drift).collect();
        let drift = if flags.is_empty() {
            None
        } else {
            Some(2 * flags.iter().filter(|f| **f).count() > flags.len())
        };
        let (r, c) = split.variable(&col.name)?;
        let (reference_mean, reference_std) = mean_std(r);
        let (current_mean, current_std) = mean_std(c);
        reports.push(VariableReport {
            name: col.name.clone(),
            role: col.role,
            dtype: col.dtype,
            results,
            drift,
            profile: VariableProfile {
                reference_mean,
                reference_std,
                current_mean,
                current_std,
                histogram: shared_histogram(r, c, cfg.params.hist_bins).ok(),
                series: series(&split.current.time, c),
            },
        });
    }

    let dataset_results = if cfg.methods.contains(&MethodId::SpotTheDifference) {
        vec![frame_result(split, cfg)?]
    } else {
        Vec::new()
    };

    let mut method_summary = Vec::new();
    let mut groups = BTreeMap::new();
    for &m in &cfg.methods {
        if m.is_frame_level() {
            let flag = dataset_results.iter().find(|r| r.method == m).and_then(|r| r.drift);
            method_summary.push(MethodSummary {
                method: m,
                share: flag.map(|f| if f { 1.0 } else { 0.0 }),
                alarm: flag,
                group: truth.map(|_| Group::NotApplicable),
            });
            if truth.is_some() {
                groups.insert(m, Group::NotApplicable);
            }
            continue;
        }
        let idx = per_var.iter().position(|x| *x == m).expect("per-variable method");
        let flags: Vec<(String, bool)> = reports
            .iter()
            .filter_map(|v| v.results[idx].drift.map(|d| (v.name.clone(), d)))
            .collect();
        let complete = flags.len() == reports.len();
        let (share, alarm) = if flags.is_empty() {
            (None, None)
        } else {
            let (s, a) = dataset_alarm(&flags, &cfg.weights, cfg.share_threshold)?;
            (Some(s), Some(a))
        };
        let group = match truth {
            Some(t) if complete => {
                let map: BTreeMap<String, bool> = flags.into_iter().collect();
                Some(classify_group(&map, t)?)
            }
            Some(_) => Some(Group::NotApplicable),
            None => None,
        };
        if let Some(g) = group {
            groups.insert(m, g);
        }
        method_summary.push(MethodSummary {
            method: m,
            share,
            alarm,
            group,
        });
    }

    let verdicts: Vec<(String, bool)> = reports
        .iter()
        .filter_map(|v| v.drift.map(|d| (v.name.clone(), d)))
        .collect();
    let (share, alarm) = if !verdicts.is_empty() {
        dataset_alarm(&verdicts, &cfg.weights, cfg.share_threshold)?
    } else if let Some(flag) = dataset_results.iter().find_map(|r| r.drift) {
        // only frame-level evidence is available
        (if flag { 1.0 } else { 0.0 }, flag)
    } else {
        return Err(Error::InsufficientData("no method produced a verdict".into()));
    };

    Ok(DriftReport {
        dataset: split.reference.name.clone(),
        split_timestamp: split.split_timestamp,
        seed: cfg.seed,
        chunking: cfg.chunks,
        variables: reports,
        dataset_results,
        method_summary,
        share,
        alarm,
        groups: truth.map(|_| groups),
        performance: performance(split, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, Scenario, SynthConfig};

    #[test]
    fn uc2_defaults_alarm() {
        let (split, truth) = generate(&SynthConfig::new(Scenario::Uc2Dataset, 4)).unwrap();
        let report = detect(&split, &DetectConfig::default(), Some(&truth)).unwrap();
        assert_eq!(report.share, 1.0);
        assert!(report.alarm);
        assert_eq!(report.groups.as_ref().unwrap()[&MethodId::SpotTheDifference], Group::NotApplicable);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (split, _) = generate(&SynthConfig::new(Scenario::Custom, 4)).unwrap();
        let mut cfg = DetectConfig::default();
        let a = detect(&split, &cfg, None).unwrap();
        cfg.parallelism = Parallelism::Sequential;
        let b = detect(&split, &cfg, None).unwrap();
        assert_eq!(a, b);
    }
}
