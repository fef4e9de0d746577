use super::{check_samples, mean_var, sorted, MethodId, MethodOutput};
use crate::error::{Error, Result};

/// First Wasserstein distance between the empirical distributions, computed
/// as the integral of `|F_ref - F_cur|`. With `normalize` the distance is
/// divided by the reference standard deviation.
pub fn wasserstein_1d(reference: &[f64], current: &[f64], normalize: bool) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let a = sorted(reference);
    let b = sorted(current);
    let raw = cdf_l1(&a, &b);
    let value = if normalize {
        let sd = mean_var(reference, 0).1.sqrt();
        if sd == 0.0 {
            return Err(Error::Degenerate(
                "reference standard deviation is zero; cannot normalise".into(),
            ));
        }
        raw / sd
    } else {
        raw
    };
    Ok(MethodOutput::distance(MethodId::Wasserstein, value, value))
}

fn cdf_l1(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    for w in all.windows(2) {
        let x = w[0];
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        total += (i as f64 / m - j as f64 / n).abs() * (w[1] - w[0]);
    }
    total
}

/// Mean of `|x - y|` over all pairs from two sorted samples, via prefix sums.
fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    let total_a: f64 = a.iter().sum();
    let mut below = 0usize;
    let mut below_sum = 0.0;
    let mut acc = 0.0;
    for &y in b {
        while below < a.len() && a[below] <= y {
            below_sum += a[below];
            below += 1;
        }
        let above = a.len() - below;
        acc += y * below as f64 - below_sum + (total_a - below_sum) - y * above as f64;
    }
    acc / (a.len() as f64 * b.len() as f64)
}

/// Energy distance `sqrt(2 E|X-Y| - E|X-X'| - E|Y-Y'|)` with exact pairwise
/// means in O(n log n).
pub fn energy_distance(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let a = sorted(reference);
    let b = sorted(current);
    let sq = 2.0 * mean_abs_diff(&a, &b) - mean_abs_diff(&a, &a) - mean_abs_diff(&b, &b);
    let d = sq.max(0.0).sqrt();
    Ok(MethodOutput::distance(MethodId::Energy, d, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wasserstein_identical_zero() {
        let x = [0.3, -1.0, 2.5, 2.5];
        assert_eq!(wasserstein_1d(&x, &x, true).unwrap().drift_value, 0.0);
    }

    #[test]
    fn wasserstein_point_masses() {
        let out = wasserstein_1d(&[0.0, 0.0], &[1.0, 1.0], false).unwrap();
        assert_eq!(out.drift_value, 1.0);
    }

    #[test]
    fn wasserstein_normalise_needs_spread() {
        assert!(wasserstein_1d(&[1.0, 1.0], &[2.0], true).is_err());
    }

    #[test]
    fn energy_single_points() {
        let out = energy_distance(&[0.0], &[1.0]).unwrap();
        assert!((out.drift_value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn energy_identical_zero() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.6];
        assert_eq!(energy_distance(&x, &x).unwrap().drift_value, 0.0);
    }
}
