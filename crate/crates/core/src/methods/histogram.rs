use serde::{Deserialize, Serialize};

use super::{check_samples, MethodId, MethodOutput};
use crate::error::{Error, Result};

pub const DEFAULT_SMOOTHING: f64 = 1e-9;

/// Equal-width bins over the pooled range with per-side probabilities.
/// The four binned divergences all read from one of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedHistogram {
    pub edges: Vec<f64>,
    pub ref_probs: Vec<f64>,
    pub cur_probs: Vec<f64>,
    pub smoothing_eps: f64,
}

/// `max(10, Sturges(n))` bins.
pub fn auto_bins(n: usize) -> usize {
    let sturges = (n.max(1) as f64).log2().ceil() as usize + 1;
    sturges.max(10)
}

pub fn shared_histogram(
    reference: &[f64],
    current: &[f64],
    n_bins: Option<usize>,
) -> Result<SharedHistogram> {
    check_samples(reference, current, 1)?;
    let k = n_bins.unwrap_or_else(|| auto_bins(reference.len()));
    if k == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let (lo, hi) = reference
        .iter()
        .chain(current)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if lo == hi {
        return Err(Error::Degenerate(
            "pooled data is constant; histogram has zero width".into(),
        ));
    }
    let width = (hi - lo) / k as f64;
    let mut edges: Vec<f64> = (0..k).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);

    let probs = |sample: &[f64]| {
        let mut counts = vec![0.0; k];
        for &x in sample {
            // the pooled maximum lands in the last bin
            let b = (((x - lo) / width).floor() as usize).min(k - 1);
            counts[b] += 1.0;
        }
        let total = sample.len() as f64 + k as f64 * DEFAULT_SMOOTHING;
        counts
            .into_iter()
            .map(|c| (c + DEFAULT_SMOOTHING) / total)
            .collect::<Vec<_>>()
    };
    Ok(SharedHistogram {
        edges,
        ref_probs: probs(reference),
        cur_probs: probs(current),
        smoothing_eps: DEFAULT_SMOOTHING,
    })
}

impl SharedHistogram {
    /// Histogram from explicit probability vectors (unit-width bins, no smoothing).
    pub fn from_probs(ref_probs: Vec<f64>, cur_probs: Vec<f64>) -> Result<Self> {
        if ref_probs.len() != cur_probs.len() || ref_probs.is_empty() {
            return Err(Error::InvalidArgument(
                "probability vectors must be non-empty and of equal length".into(),
            ));
        }
        for p in [&ref_probs, &cur_probs] {
            let sum: f64 = p.iter().sum();
            if p.iter().any(|x| x.is_nan() || *x < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(
                    "probabilities must be non-negative and sum to 1".into(),
                ));
            }
        }
        Ok(Self {
            edges: (0..=ref_probs.len()).map(|i| i as f64).collect(),
            ref_probs,
            cur_probs,
            smoothing_eps: 0.0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.ref_probs.len()
    }
}

fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).log2()
    }
}

/// Square root of the base-2 Jensen-Shannon divergence; lies in [0, 1].
pub fn jensen_shannon_distance(h: &SharedHistogram) -> MethodOutput {
    let (p, q) = (&h.ref_probs, &h.cur_probs);
    let (mut kl_p, mut kl_q) = (0.0, 0.0);
    for (&pi, &qi) in p.iter().zip(q) {
        let mi = (pi + qi) / 2.0;
        kl_p += xlogy_ratio(pi, mi);
        kl_q += xlogy_ratio(qi, mi);
    }
    let js = 0.5 * kl_p + 0.5 * kl_q;
    let d = js.max(0.0).sqrt().min(1.0);
    MethodOutput::distance(MethodId::JensenShannon, d, d)
}

/// `KL(current || reference)` in nats.
pub fn kl_divergence(h: &SharedHistogram) -> MethodOutput {
    let kl: f64 = h
        .cur_probs
        .iter()
        .zip(&h.ref_probs)
        .map(|(&q, &p)| if q == 0.0 { 0.0 } else { q * (q / p).ln() })
        .sum();
    let kl = kl.max(0.0);
    MethodOutput::distance(MethodId::Kl, kl, kl)
}

/// Hellinger distance, `sqrt(1 - sum sqrt(p q))`, evaluated in the
/// equivalent squared-difference form so identical inputs give exactly 0.
pub fn hellinger_distance(h: &SharedHistogram) -> MethodOutput {
    let half_sq: f64 = h
        .ref_probs
        .iter()
        .zip(&h.cur_probs)
        .map(|(&p, &q)| (p.sqrt() - q.sqrt()).powi(2))
        .sum::<f64>()
        / 2.0;
    let d = half_sq.max(0.0).sqrt().min(1.0);
    MethodOutput::distance(MethodId::Hellinger, d, d)
}
