//! Plot-ready data derived from a drift report. No rendering happens here.

use serde::{Deserialize, Serialize};

use crate::dataset::Timestamp;
use crate::decision::ThresholdSpec;
use crate::methods::MethodId;
use crate::pipeline::{ChunkPoint, DriftReport, MethodResult, SeriesPoint};

pub const NO_CHUNKS_NOTICE: &str = "report has no chunk data; per-chunk section omitted";
pub const NO_HISTOGRAM_NOTICE: &str = "no shared histogram for this variable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPlot {
    pub points: Vec<SeriesPoint>,
    pub reference_mean: f64,
    pub band_lower: f64,
    pub band_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPlot {
    pub edges: Vec<f64>,
    pub reference: Vec<f64>,
    pub current: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkPlot {
    pub method: MethodId,
    pub points: Vec<ChunkPoint>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariablePlots {
    pub name: String,
    pub series: SeriesPlot,
    pub histogram: Option<HistogramPlot>,
    pub chunks: Option<Vec<ChunkPlot>>,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotBundle {
    pub dataset: String,
    pub split_timestamp: Timestamp,
    pub variables: Vec<VariablePlots>,
}

fn threshold_lines(r: &MethodResult) -> (Option<f64>, Option<f64>) {
    match r.threshold {
        ThresholdSpec::PLeft { alpha } => (Some(alpha), None),
        ThresholdSpec::DistanceRight { upper } => (None, Some(upper)),
        ThresholdSpec::ConstantBand { lower, upper } => (lower, upper),
        ThresholdSpec::SigmaBand { .. } => match r.band {
            Some(b) => (Some(b.lower), Some(b.upper)),
            None => (None, None),
        },
    }
}

pub fn plot_bundle(report: &DriftReport) -> PlotBundle {
    let variables = report
        .variables
        .iter()
        .map(|v| {
            let p = &v.profile;
            let mut notices = Vec::new();
            let histogram = p.histogram.as_ref().map(|h| HistogramPlot {
                edges: h.edges.clone(),
                reference: h.ref_probs.clone(),
                current: h.cur_probs.clone(),
            });
            if histogram.is_none() {
                notices.push(NO_HISTOGRAM_NOTICE.to_string());
            }
            let chunk_plots: Vec<ChunkPlot> = v
                .results
                .iter()
                .filter_map(|r| {
                    let points = r.chunks.as_ref()?;
                    let (lower, upper) = threshold_lines(r);
                    Some(ChunkPlot {
                        method: r.method,
                        points: points.clone(),
                        lower,
                        upper,
                    })
                })
                .collect();
            let chunks = if chunk_plots.is_empty() {
                notices.push(NO_CHUNKS_NOTICE.to_string());
                None
            } else {
                Some(chunk_plots)
            };
            VariablePlots {
                name: v.name.clone(),
                series: SeriesPlot {
                    points: p.series.clone(),
                    reference_mean: p.reference_mean,
                    band_lower: p.reference_mean - p.reference_std,
                    band_upper: p.reference_mean + p.reference_std,
                },
                histogram,
                chunks,
                notices,
            }
        })
        .collect();
    PlotBundle {
        dataset: report.dataset.clone(),
        split_timestamp: report.split_timestamp,
        variables,
    }
}

/// Serialize with sorted keys so identical inputs give identical bytes.
pub fn to_sorted_json<T: Serialize>(value: &T) -> crate::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{detect, DetectConfig};
    use crate::synth::{generate, Scenario, SynthConfig};

    #[test]
    fn unchunked_bundle_has_notice() {
        let (split, _) = generate(&SynthConfig::new(Scenario::Custom, 1)).unwrap();
        let cfg = DetectConfig {
            methods: vec![MethodId::Ks, MethodId::JensenShannon],
            ..DetectConfig::default()
        };
        let report = detect(&split, &cfg, None).unwrap();
        let bundle = plot_bundle(&report);
        assert_eq!(bundle.variables.len(), 3);
        for v in &bundle.variables {
            assert!(v.chunks.is_none());
            assert!(v.notices.iter().any(|n| n == NO_CHUNKS_NOTICE));
            assert_eq!(
                v.histogram.as_ref().unwrap().edges,
                report.variable(&v.name).unwrap().profile.histogram.as_ref().unwrap().edges
            );
        }
    }

    #[test]
    fn sorted_keys() {
        #[derive(Serialize)]
        struct T {
            b: u8,
            a: u8,
        }
        let s = to_sorted_json(&T { b: 1, a: 2 }).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }
}
