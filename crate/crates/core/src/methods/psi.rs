use super::{check_samples, quantile_sorted, sorted, MethodId, MethodOutput};
use crate::error::{Error, Result};

pub const PSI_FLOOR: f64 = 1e-4;

/// Population stability index over reference-quantile bins (deciles by
/// default) with open outer bins.
pub fn psi(reference: &[f64], current: &[f64], n_bins: usize) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    if n_bins < 2 {
        return Err(Error::InvalidArgument("psi needs at least two bins".into()));
    }
    let r = sorted(reference);
    let distinct = 1 + r.windows(2).filter(|w| w[1] != w[0]).count();
    if distinct < n_bins {
        return Err(Error::InsufficientData(format!(
            "reference has {distinct} distinct values, {n_bins} bins requested"
        )));
    }
    let edges: Vec<f64> = (1..n_bins)
        .map(|i| quantile_sorted(&r, i as f64 / n_bins as f64))
        .collect();
    psi_with_edges(reference, current, &edges)
}

/// PSI over caller-supplied interior edges; bins are right-closed and the
/// outer bins extend to infinity. Used directly for binary columns.
pub fn psi_with_edges(reference: &[f64], current: &[f64], edges: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let proportions = |sample: &[f64]| {
        let mut counts = vec![0usize; edges.len() + 1];
        for &x in sample {
            counts[edges.partition_point(|&e| e < x)] += 1;
        }
        counts
            .into_iter()
            .map(|c| (c as f64 / sample.len() as f64).max(PSI_FLOOR))
            .collect::<Vec<_>>()
    };
    let p = proportions(reference);
    let q = proportions(current);
    let value: f64 = p
        .iter()
        .zip(&q)
        .map(|(&pr, &cu)| (cu - pr) * (cu / pr).ln())
        .sum();
    Ok(MethodOutput::distance(MethodId::Psi, value, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_proportions_zero() {
        let r: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(psi(&r, &r, 10).unwrap().drift_value, 0.0);
    }

    #[test]
    fn two_bin_hand_value() {
        let out = psi_with_edges(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0], &[0.5]).unwrap();
        let want = 0.25 * 2f64.ln() + 0.25 * 1.5f64.ln();
        assert!((out.drift_value - want).abs() < 1e-15);
    }

    #[test]
    fn too_few_distinct_values() {
        let r = [0.0, 1.0, 0.0, 1.0, 1.0];
        assert!(matches!(psi(&r, &r, 10), Err(Error::InsufficientData(_))));
    }
}
