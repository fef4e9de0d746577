//! Two-sample drift detectors. Each returns a [`MethodOutput`] carrying either
//! a p-value or a distance.

mod anderson;
mod classifier;
mod cvm;
mod epps;
mod histogram;
mod ks;
mod psi;
mod ranks;
pub mod special;
mod transport;
mod ttest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dtype;
use crate::error::{Error, Result};

pub use anderson::{anderson_darling_2samp, critical_values as anderson_critical_values};
pub use classifier::{spot_the_difference, SpotParams};
pub use cvm::cvm_two_sample;
pub use epps::{epps_singleton, DEFAULT_T_POINTS};
pub use histogram::{
    auto_bins, hellinger_distance, jensen_shannon_distance, kl_divergence, shared_histogram,
    SharedHistogram, DEFAULT_SMOOTHING,
};
pub use ks::{ks_approximate, ks_two_sample};
pub use psi::{psi, psi_with_edges, PSI_FLOOR};
pub use ranks::mann_whitney_u;
pub use transport::{energy_distance, wasserstein_1d};
pub use ttest::t_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Ks,
    KsApprox,
    Cvm,
    AndersonDarling,
    EppsSingleton,
    MannWhitney,
    TTest,
    Wasserstein,
    Energy,
    JensenShannon,
    Kl,
    Hellinger,
    Psi,
    SpotTheDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    PValue,
    Distance,
    /// Raw statistic with no reference distribution; only band thresholds apply.
    Statistic,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::PValue => "p_value",
            ValueKind::Distance => "distance",
            ValueKind::Statistic => "statistic",
        }
    }
}

impl MethodId {
    pub const ALL: [MethodId; 14] = [
        MethodId::Ks,
        MethodId::KsApprox,
        MethodId::Cvm,
        MethodId::AndersonDarling,
        MethodId::EppsSingleton,
        MethodId::MannWhitney,
        MethodId::TTest,
        MethodId::Wasserstein,
        MethodId::Energy,
        MethodId::JensenShannon,
        MethodId::Kl,
        MethodId::Hellinger,
        MethodId::Psi,
        MethodId::SpotTheDifference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Ks => "ks",
            MethodId::KsApprox => "ks_approx",
            MethodId::Cvm => "cvm",
            MethodId::AndersonDarling => "anderson_darling",
            MethodId::EppsSingleton => "epps_singleton",
            MethodId::MannWhitney => "mann_whitney",
            MethodId::TTest => "t_test",
            MethodId::Wasserstein => "wasserstein",
            MethodId::Energy => "energy",
            MethodId::JensenShannon => "jensen_shannon",
            MethodId::Kl => "kl",
            MethodId::Hellinger => "hellinger",
            MethodId::Psi => "psi",
            MethodId::SpotTheDifference => "spot_the_difference",
        }
    }

    pub fn value_kind(self) -> ValueKind {
        match self {
            MethodId::Ks
            | MethodId::Cvm
            | MethodId::AndersonDarling
            | MethodId::EppsSingleton
            | MethodId::MannWhitney
            | MethodId::TTest
            | MethodId::SpotTheDifference => ValueKind::PValue,
            MethodId::KsApprox => ValueKind::Statistic,
            _ => ValueKind::Distance,
        }
    }

    /// Frame-level methods produce one result for the whole dataset.
    pub fn is_frame_level(self) -> bool {
        self == MethodId::SpotTheDifference
    }
}

/// The thirteen methods of the comparison matrix (exact KS only).
pub fn table_methods() -> Vec<MethodId> {
    MethodId::ALL
        .into_iter()
        .filter(|m| *m != MethodId::KsApprox)
        .collect()
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Parses `all` or a comma-separated list of method ids.
pub fn parse_method_list(s: &str) -> Result<Vec<MethodId>> {
    if s.trim() == "all" {
        return Ok(table_methods());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: MethodId = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("method list is empty".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodOutput {
    pub method: MethodId,
    pub statistic: f64,
    pub drift_value: f64,
    pub value_kind: ValueKind,
    #[serde(default)]
    pub degenerate: bool,
}

impl MethodOutput {
    pub const P_MIN: f64 = 1e-300;

    pub fn p_value(method: MethodId, statistic: f64, p: f64) -> Self {
        Self {
            method,
            statistic,
            drift_value: p.clamp(Self::P_MIN, 1.0),
            value_kind: ValueKind::PValue,
            degenerate: false,
        }
    }

    pub fn distance(method: MethodId, statistic: f64, value: f64) -> Self {
        Self {
            method,
            statistic,
            drift_value: value.max(0.0),
            value_kind: ValueKind::Distance,
            degenerate: false,
        }
    }

    pub fn statistic(method: MethodId, value: f64) -> Self {
        Self {
            method,
            statistic: value,
            drift_value: value,
            value_kind: ValueKind::Statistic,
            degenerate: false,
        }
    }
}

/// Tunables shared by the per-variable methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodParams {
    pub epps_t: (f64, f64),
    pub wasserstein_normalize: bool,
    pub hist_bins: Option<usize>,
    pub psi_bins: usize,
    pub spot: SpotParams,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            epps_t: DEFAULT_T_POINTS,
            wasserstein_normalize: true,
            hist_bins: None,
            psi_bins: 10,
            spot: SpotParams::default(),
        }
    }
}

/// Runs one per-variable method. Binary columns use a fixed two-bin PSI split.
pub fn evaluate(
    method: MethodId,
    reference: &[f64],
    current: &[f64],
    params: &MethodParams,
    dtype: Dtype,
) -> Result<MethodOutput> {
    match method {
        MethodId::Ks => ks_two_sample(reference, current),
        MethodId::KsApprox => ks_approximate(reference, current),
        MethodId::Cvm => cvm_two_sample(reference, current),
        MethodId::AndersonDarling => anderson_darling_2samp(reference, current),
        MethodId::EppsSingleton => epps_singleton(reference, current, params.epps_t),
        MethodId::MannWhitney => mann_whitney_u(reference, current),
        MethodId::TTest => t_test(reference, current),
        MethodId::Wasserstein => wasserstein_1d(reference, current, params.wasserstein_normalize),
        MethodId::Energy => energy_distance(reference, current),
        MethodId::JensenShannon => Ok(jensen_shannon_distance(&shared_histogram(
            reference,
            current,
            params.hist_bins,
        )?)),
        MethodId::Kl => Ok(kl_divergence(&shared_histogram(
            reference,
            current,
            params.hist_bins,
        )?)),
        MethodId::Hellinger => Ok(hellinger_distance(&shared_histogram(
            reference,
            current,
            params.hist_bins,
        )?)),
        MethodId::Psi => match dtype {
            Dtype::Binary => psi_with_edges(reference, current, &[0.5]),
            _ => psi(reference, current, params.psi_bins),
        },
        MethodId::SpotTheDifference => Err(Error::InvalidArgument(
            "spot_the_difference operates on whole frames, not single variables".into(),
        )),
    }
}

pub(crate) fn check_samples(reference: &[f64], current: &[f64], min_len: usize) -> Result<()> {
    for (name, s) in [("reference", reference), ("current", current)] {
        if s.len() < min_len.max(1) {
            return Err(Error::InsufficientData(format!(
                "{name} sample has {} values, need at least {}",
                s.len(),
                min_len.max(1)
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} sample contains non-finite values"
            )));
        }
    }
    Ok(())
}

pub(crate) fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of an ascending sample.
pub(crate) fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        s[lo]
    } else {
        s[lo] + (s[hi] - s[lo]) * frac
    }
}

/// Mean and variance with `ddof` delta degrees of freedom.
pub(crate) fn mean_var(x: &[f64], ddof: usize) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, ss / (n - ddof as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for m in MethodId::ALL {
            assert_eq!(m.as_str().parse::<MethodId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert_eq!(table_methods().len(), 13);
    }

    #[test]
    fn quantiles_match_linear_rule() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn p_values_clamped() {
        let out = MethodOutput::p_value(MethodId::Ks, 1.0, 0.0);
        assert_eq!(out.drift_value, 1e-300);
    }

    #[test]
    fn method_list_parsing() {
        assert_eq!(parse_method_list("all").unwrap().len(), 13);
        assert_eq!(
            parse_method_list("ks, psi,ks").unwrap(),
            vec![MethodId::Ks, MethodId::Psi]
        );
        assert!(parse_method_list("nope").is_err());
    }
}
