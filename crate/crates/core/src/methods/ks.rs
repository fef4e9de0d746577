use super::{check_samples, quantile_sorted, sorted, MethodId, MethodOutput};
use crate::error::{Error, Result};
use crate::methods::special::kolmogorov_sf;

/// Largest ECDF gap between two sorted samples.
pub(crate) fn ks_statistic_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value
/// at effective size `mn / (m + n)`.
pub fn ks_two_sample(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let a = sorted(reference);
    let b = sorted(current);
    let d = ks_statistic_sorted(&a, &b);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let en = (m * n / (m + n)).sqrt();
    let p = kolmogorov_sf(en * d);
    Ok(MethodOutput::p_value(MethodId::Ks, d, p))
}

/// Binned KS statistic: cumulative relative frequencies compared at the
/// reference quartile edges (minimum, three quartiles, maximum). No p-value.
pub fn ks_approximate(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let a = sorted(reference);
    let b = sorted(current);
    if a[0] == a[a.len() - 1] {
        return Err(Error::Degenerate(
            "reference is constant; quartile binning collapses to a single bin".into(),
        ));
    }
    let ecdf = |s: &[f64], x: f64| s.partition_point(|&v| v <= x) as f64 / s.len() as f64;
    let d = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&q| quantile_sorted(&a, q))
        .map(|edge| (ecdf(&a, edge) - ecdf(&b, edge)).abs())
        .fold(0.0, f64::max);
    Ok(MethodOutput::statistic(MethodId::KsApprox, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let out = ks_two_sample(&x, &x).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.drift_value, 1.0);
    }

    #[test]
    fn disjoint_supports() {
        let out = ks_two_sample(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(out.statistic, 1.0);
    }

    #[test]
    fn approx_equal_samples_zero() {
        let x: Vec<f64> = (0..40).map(|i| (i * 7 % 13) as f64).collect();
        assert_eq!(ks_approximate(&x, &x).unwrap().statistic, 0.0);
    }

    #[test]
    fn approx_hand_computed_gap() {
        // ref quartile edges 1, 2.75, 4.5, 6.25, 8; gaps 1/8, 1/4, 1/2, 1/2, 1/2
        let r: Vec<f64> = (1..=8).map(f64::from).collect();
        let c: Vec<f64> = (5..=12).map(f64::from).collect();
        assert_eq!(ks_approximate(&r, &c).unwrap().statistic, 0.5);
    }

    #[test]
    fn approx_shift_beyond_max() {
        let r: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let c: Vec<f64> = r.iter().map(|x| x + 5.0).collect();
        assert_eq!(ks_approximate(&r, &c).unwrap().statistic, 1.0);
    }

    #[test]
    fn approx_constant_reference() {
        assert!(matches!(
            ks_approximate(&[2.0; 10], &[1.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
    }
}
