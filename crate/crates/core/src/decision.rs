//! Threshold rules, dataset alarms, ground-truth grouping and confidence-based
//! performance estimation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::{MethodId, MethodOutput, ValueKind};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_UPPER: f64 = 0.1;
pub const DEFAULT_FACTOR: f64 = 3.0;
pub const DEFAULT_SHARE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_CHUNK_RATIO: f64 = 0.5;
pub const DEFAULT_CBPE_THRESHOLD: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdSpec {
    PLeft {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    DistanceRight {
        #[serde(default = "default_upper")]
        upper: f64,
    },
    ConstantBand {
        #[serde(default)]
        lower: Option<f64>,
        #[serde(default)]
        upper: Option<f64>,
    },
    SigmaBand {
        #[serde(default = "default_factor")]
        factor: f64,
    },
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_upper() -> f64 {
    DEFAULT_UPPER
}
fn default_factor() -> f64 {
    DEFAULT_FACTOR
}

impl ThresholdSpec {
    pub fn p_left() -> Self {
        ThresholdSpec::PLeft { alpha: DEFAULT_ALPHA }
    }

    pub fn distance_right() -> Self {
        ThresholdSpec::DistanceRight { upper: DEFAULT_UPPER }
    }

    pub fn sigma_band() -> Self {
        ThresholdSpec::SigmaBand { factor: DEFAULT_FACTOR }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThresholdSpec::PLeft { .. } => "p_left",
            ThresholdSpec::DistanceRight { .. } => "distance_right",
            ThresholdSpec::ConstantBand { .. } => "constant_band",
            ThresholdSpec::SigmaBand { .. } => "sigma_band",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ThresholdSpec::PLeft { alpha } => alpha > 0.0 && alpha < 1.0,
            ThresholdSpec::DistanceRight { upper } => upper > 0.0,
            ThresholdSpec::ConstantBand { lower, upper } => match (lower, upper) {
                (None, None) => false,
                (Some(l), Some(u)) => l <= u,
                _ => true,
            },
            ThresholdSpec::SigmaBand { factor } => factor > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid {} threshold: {self:?}", self.name())))
        }
    }

    pub fn needs_band(&self) -> bool {
        matches!(self, ThresholdSpec::SigmaBand { .. })
    }

    /// Default for whole-dataset comparison: p < 0.05 for tests, d > 0.1 for
    /// distances, a constant 0.1 ceiling for the binned KS statistic.
    pub fn default_for(method: MethodId) -> Self {
        match method.value_kind() {
            ValueKind::PValue => Self::p_left(),
            ValueKind::Distance => Self::distance_right(),
            ValueKind::Statistic => ThresholdSpec::ConstantBand {
                lower: None,
                upper: Some(DEFAULT_UPPER),
            },
        }
    }

    /// Default for chunked comparison: KS and Wasserstein move to a
    /// reference-fitted band.
    pub fn chunked_default_for(method: MethodId) -> Self {
        match method {
            MethodId::Ks | MethodId::KsApprox | MethodId::Wasserstein => Self::sigma_band(),
            other => Self::default_for(other),
        }
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ThresholdSpec::PLeft { alpha } => write!(f, "p < {alpha}"),
            ThresholdSpec::DistanceRight { upper } => write!(f, "d > {upper}"),
            ThresholdSpec::ConstantBand { lower, upper } => {
                write!(f, "outside [{}, {}]", fmt_bound(lower, "-inf"), fmt_bound(upper, "inf"))
            }
            ThresholdSpec::SigmaBand { factor } => write!(f, "outside mean +/- {factor} sigma"),
        }
    }
}

fn fmt_bound(b: Option<f64>, open: &str) -> String {
    b.map_or_else(|| open.to_string(), |v| v.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBand {
    pub mean: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Mean and population σ of reference-side statistics, widened by `factor`.
pub fn fit_sigma_band(reference_stats: &[f64], factor: f64) -> Result<SigmaBand> {
    if reference_stats.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "sigma band needs at least 2 reference statistics (got {})",
            reference_stats.len()
        )));
    }
    if factor.is_nan() || factor <= 0.0 {
        return Err(Error::InvalidArgument("sigma band factor must be positive".into()));
    }
    if reference_stats.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("reference statistics must be finite".into()));
    }
    let n = reference_stats.len() as f64;
    let mean = reference_stats.iter().sum::<f64>() / n;
    let sigma = (reference_stats.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SigmaBand {
        mean,
        sigma,
        lower: mean - factor * sigma,
        upper: mean + factor * sigma,
    })
}

/// The number a band threshold compares: the raw statistic for tests, the
/// drift value otherwise.
pub fn band_value(out: &MethodOutput) -> f64 {
    match out.value_kind {
        ValueKind::PValue => out.statistic,
        _ => out.drift_value,
    }
}

fn incompatible(spec: &ThresholdSpec, kind: ValueKind) -> Error {
    Error::IncompatibleThreshold {
        threshold: spec.name(),
        value_kind: kind.as_str(),
    }
}

pub fn apply_threshold(
    out: &MethodOutput,
    spec: &ThresholdSpec,
    band: Option<&SigmaBand>,
) -> Result<bool> {
    spec.validate()?;
    match *spec {
        ThresholdSpec::PLeft { alpha } => {
            if out.value_kind != ValueKind::PValue {
                return Err(incompatible(spec, out.value_kind));
            }
            Ok(out.drift_value < alpha)
        }
        ThresholdSpec::DistanceRight { upper } => {
            if out.value_kind != ValueKind::Distance {
                return Err(incompatible(spec, out.value_kind));
            }
            Ok(out.drift_value > upper)
        }
        ThresholdSpec::ConstantBand { lower, upper } => {
            let v = band_value(out);
            Ok(lower.is_some_and(|l| v < l) || upper.is_some_and(|u| v > u))
        }
        ThresholdSpec::SigmaBand { .. } => {
            let band = band.ok_or_else(|| {
                Error::InvalidArgument("sigma band threshold applied without a fitted band".into())
            })?;
            let v = band_value(out);
            Ok(v < band.lower || v > band.upper)
        }
    }
}

/// Weighted share of drifted variables; the alarm needs a share strictly
/// above `share_threshold`. Variables without a weight count 1.
pub fn dataset_alarm(
    flags: &[(String, bool)],
    weights: &BTreeMap<String, f64>,
    share_threshold: f64,
) -> Result<(f64, bool)> {
    if flags.is_empty() {
        return Err(Error::InvalidArgument("dataset alarm needs at least one variable".into()));
    }
    let mut total = 0.0;
    let mut drifted = 0.0;
    for (name, flag) in flags {
        let w = weights.get(name).copied().unwrap_or(1.0);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight for {name} must be positive (got {w})"
            )));
        }
        total += w;
        if *flag {
            drifted += w;
        }
    }
    let share = drifted / total;
    Ok((share, share > share_threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Covariate,
    PriorProbability,
    Concept,
    Dataset,
}

/// Which variables truly differ between reference and current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthDriftSpec {
    pub flags: BTreeMap<String, bool>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub shift_kind: Option<ShiftKind>,
}

impl GroundTruthDriftSpec {
    pub fn new(
        flags: impl IntoIterator<Item = (String, bool)>,
        target: Option<&str>,
        shift_kind: Option<ShiftKind>,
    ) -> Result<Self> {
        let spec = Self {
            flags: flags.into_iter().collect(),
            target: target.map(str::to_string),
            shift_kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that the shift kind agrees with the per-variable flags.
    pub fn validate(&self) -> Result<()> {
        let target_flag = match &self.target {
            Some(t) => Some(
                *self
                    .flags
                    .get(t)
                    .ok_or_else(|| Error::Schema(format!("target {t} missing from truth flags")))?,
            ),
            None => None,
        };
        let any_input = self
            .flags
            .iter()
            .any(|(k, v)| *v && self.target.as_deref() != Some(k.as_str()));
        let ok = match self.shift_kind {
            None => self.flags.values().all(|v| !v),
            Some(ShiftKind::Concept | ShiftKind::Covariate) => {
                target_flag != Some(true) && any_input
            }
            Some(ShiftKind::PriorProbability) => target_flag == Some(true),
            Some(ShiftKind::Dataset) => target_flag == Some(true) && any_input,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Schema(format!(
                "shift kind {:?} inconsistent with drift flags",
                self.shift_kind
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "NA")]
    NotApplicable,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::One => "1",
            Group::Two => "2",
            Group::Three => "3",
            Group::Four => "4",
            Group::NotApplicable => "NA",
        }
    }
}

/// Group 1: inputs and target right; 2: inputs only; 3: target only; 4: neither.
pub fn classify_group(flags: &BTreeMap<String, bool>, truth: &GroundTruthDriftSpec) -> Result<Group> {
    let mut inputs_ok = true;
    let mut target_ok = true;
    for (name, flag) in flags {
        let expected = *truth
            .flags
            .get(name)
            .ok_or_else(|| Error::Schema(format!("variable {name} missing from ground truth")))?;
        if truth.target.as_deref() == Some(name.as_str()) {
            target_ok = *flag == expected;
        } else if *flag != expected {
            inputs_ok = false;
        }
    }
    Ok(match (inputs_ok, target_ok) {
        (true, true) => Group::One,
        (true, false) => Group::Two,
        (false, true) => Group::Three,
        (false, false) => Group::Four,
    })
}

/// Expected accuracy from predicted positive-class probabilities.
pub fn cbpe_accuracy(probs: &[f64], alarm_threshold: f64) -> Result<(f64, bool)> {
    if probs.is_empty() {
        return Err(Error::InsufficientData("no predictions to estimate accuracy".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let est = probs.iter().map(|&p| p.max(1.0 - p)).sum::<f64>() / probs.len() as f64;
    Ok((est, est < alarm_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn out(kind: ValueKind, v: f64) -> MethodOutput {
        match kind {
            ValueKind::PValue => MethodOutput::p_value(MethodId::Ks, 0.0, v),
            ValueKind::Distance => MethodOutput::distance(MethodId::Wasserstein, v, v),
            ValueKind::Statistic => MethodOutput::statistic(MethodId::KsApprox, v),
        }
    }

    #[test]
    fn left_and_right_tails() {
        let p = ThresholdSpec::p_left();
        let d = ThresholdSpec::distance_right();
        assert!(!apply_threshold(&out(ValueKind::PValue, 0.86), &p, None).unwrap());
        assert!(apply_threshold(&out(ValueKind::Distance, 0.27), &d, None).unwrap());
        assert!(!apply_threshold(&out(ValueKind::Distance, 0.07), &d, None).unwrap());
    }

    #[test]
    fn incompatible_pairs() {
        assert!(matches!(
            apply_threshold(&out(ValueKind::Distance, 0.2), &ThresholdSpec::p_left(), None),
            Err(Error::IncompatibleThreshold { .. })
        ));
        assert!(apply_threshold(&out(ValueKind::Statistic, 0.2), &ThresholdSpec::distance_right(), None)
            .is_err());
        assert!(apply_threshold(&out(ValueKind::Distance, 0.2), &ThresholdSpec::sigma_band(), None)
            .is_err());
    }

    #[test]
    fn band_fit() {
        let b = fit_sigma_band(&[0.0, 1.0], 3.0).unwrap();
        assert_eq!((b.lower, b.upper), (-1.0, 2.0));
        let c = fit_sigma_band(&[0.2; 4], 3.0).unwrap();
        assert_eq!((c.lower, c.upper), (0.2, 0.2));
        let spec = ThresholdSpec::sigma_band();
        assert!(apply_threshold(&out(ValueKind::Statistic, 0.21), &spec, Some(&c)).unwrap());
        assert!(fit_sigma_band(&[1.0], 3.0).is_err());
    }

    #[test]
    fn weighted_share() {
        let flags = vec![("a".to_string(), true), ("b".to_string(), false)];
        let w: BTreeMap<_, _> = [("a".to_string(), 3.0)].into_iter().collect();
        assert_eq!(dataset_alarm(&flags, &w, 0.5).unwrap(), (0.75, true));
        assert_eq!(dataset_alarm(&flags, &BTreeMap::new(), 0.5).unwrap(), (0.5, false));
        let bad: BTreeMap<_, _> = [("b".to_string(), 0.0)].into_iter().collect();
        assert!(dataset_alarm(&flags, &bad, 0.5).is_err());
    }

    #[test]
    fn cbpe_direct_mean() {
        let (est, alarm) = cbpe_accuracy(&[0.9, 0.2, 0.6], 0.97).unwrap();
        assert!((est - 2.3 / 3.0).abs() < 1e-12);
        assert!(alarm);
        assert_eq!(cbpe_accuracy(&[1.0, 1.0], 0.97).unwrap(), (1.0, false));
        assert!(cbpe_accuracy(&[1.2], 0.97).is_err());
    }

    #[test]
    fn truth_consistency() {
        let flags = [("x".to_string(), true), ("y".to_string(), false)];
        assert!(GroundTruthDriftSpec::new(flags.clone(), Some("y"), Some(ShiftKind::Concept)).is_ok());
        assert!(GroundTruthDriftSpec::new(flags, Some("y"), Some(ShiftKind::Dataset)).is_err());
    }

    #[test]
    fn threshold_json_shape() {
        let t: ThresholdSpec = serde_json::from_str(r#"{"kind":"p_left"}"#).unwrap();
        assert_eq!(t, ThresholdSpec::p_left());
        let c: ThresholdSpec = serde_json::from_str(r#"{"kind":"constant_band","upper":0.2}"#).unwrap();
        assert_eq!(c, ThresholdSpec::ConstantBand { lower: None, upper: Some(0.2) });
    }
}
