use nalgebra::{DMatrix, DVector};

use super::{check_samples, sorted, MethodId, MethodOutput};
use crate::error::{Error, Result};

const SIG: [f64; 7] = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
const B0: [f64; 7] = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
const B1: [f64; 7] = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
const B2: [f64; 7] = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];

pub const P_FLOOR: f64 = 0.001;
pub const P_CEILING: f64 = 0.25;

/// Critical values of the standardized statistic for two samples.
pub fn critical_values() -> [f64; 7] {
    let m = 1.0_f64;
    std::array::from_fn(|i| B0[i] + B1[i] / m.sqrt() + B2[i] / m)
}

fn lower_bound(s: &[f64], x: f64) -> usize {
    s.partition_point(|&v| v < x)
}

fn upper_bound(s: &[f64], x: f64) -> usize {
    s.partition_point(|&v| v <= x)
}

/// Unstandardized midrank statistic A²_akN for k samples.
fn a2_midrank(samples: &[Vec<f64>], pooled: &[f64]) -> f64 {
    let n_total = pooled.len() as f64;
    let mut distinct = pooled.to_vec();
    distinct.dedup();
    let mut a2 = 0.0;
    for s in samples {
        let ni = s.len() as f64;
        let mut inner = 0.0;
        for &z in &distinct {
            let left = lower_bound(pooled, z) as f64;
            let lj = upper_bound(pooled, z) as f64 - left;
            let bj = left + lj / 2.0;
            let fij = (upper_bound(s, z) - lower_bound(s, z)) as f64;
            let mij = upper_bound(s, z) as f64 - fij / 2.0;
            let num = (n_total * mij - bj * ni).powi(2);
            let den = bj * (n_total - bj) - n_total * lj / 4.0;
            inner += lj / n_total * num / den;
        }
        a2 += inner / ni;
    }
    a2 * (n_total - 1.0) / n_total
}

fn standardize(a2: f64, sizes: &[usize]) -> f64 {
    let k = sizes.len() as f64;
    let n = sizes.iter().sum::<usize>() as f64;
    let big_h: f64 = sizes.iter().map(|&s| 1.0 / s as f64).sum();
    let total = sizes.iter().sum::<usize>();
    // h = sum_{i=1}^{N-1} 1/i ; g = sum_{i<j<N} 1/((N-i) j)
    let mut hs = Vec::with_capacity(total.saturating_sub(2));
    let mut acc = 0.0;
    for i in (2..total).rev() {
        acc += 1.0 / i as f64;
        hs.push(acc);
    }
    let h = hs.last().copied().unwrap_or(0.0) + 1.0;
    let g: f64 = hs.iter().enumerate().map(|(i, v)| v / (i + 2) as f64).sum();

    let a = (4.0 * g - 6.0) * (k - 1.0) + (10.0 - 6.0 * g) * big_h;
    let b = (2.0 * g - 4.0) * k * k + 8.0 * h * k + (2.0 * g - 14.0 * h - 4.0) * big_h - 8.0 * h
        + 4.0 * g
        - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * k * k + (4.0 * h - 4.0 * g + 6.0) * k + (2.0 * h - 6.0) * big_h
        + 4.0 * h;
    let d = (2.0 * h + 6.0) * k * k - 4.0 * h * k;
    let sigmasq = (a * n.powi(3) + b * n * n + c * n + d) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    (a2 - (k - 1.0)) / sigmasq.sqrt()
}

/// p-value from the quadratic fit of `ln(significance)` on the critical
/// values, clamped to the table range.
pub fn interpolate_p(a2: f64) -> f64 {
    let crit = critical_values();
    if a2 < crit[0] {
        return P_CEILING;
    }
    if a2 > crit[6] {
        return P_FLOOR;
    }
    let x = DMatrix::from_fn(7, 3, |r, c| crit[r].powi(2 - c as i32));
    let y = DVector::from_iterator(7, SIG.iter().map(|s| s.ln()));
    let coef = x
        .svd(true, true)
        .solve(&y, 1e-14)
        .expect("svd solve with both factors computed");
    (coef[0] * a2 * a2 + coef[1] * a2 + coef[2]).exp()
}

/// Two-sample Anderson-Darling test (k-sample form with midrank ties).
pub fn anderson_darling_2samp(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 2)?;
    let a = sorted(reference);
    let b = sorted(current);
    let mut pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    if pooled[0] == pooled[pooled.len() - 1] {
        return Err(Error::Degenerate(
            "Anderson-Darling needs more than one distinct observation".into(),
        ));
    }
    let sizes = [a.len(), b.len()];
    let a2 = standardize(a2_midrank(&[a, b], &pooled), &sizes);
    Ok(MethodOutput::p_value(MethodId::AndersonDarling, a2, interpolate_p(a2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_hit_ceiling() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let out = anderson_darling_2samp(&x, &x).unwrap();
        assert_eq!(out.drift_value, 0.25);
    }

    #[test]
    fn disjoint_samples_hit_floor() {
        let r: Vec<f64> = (0..300).map(f64::from).collect();
        let c: Vec<f64> = (1000..1300).map(f64::from).collect();
        assert_eq!(anderson_darling_2samp(&r, &c).unwrap().drift_value, 0.001);
    }

    #[test]
    fn interpolation_passes_near_grid() {
        let crit = critical_values();
        for (c, s) in crit.iter().zip(SIG) {
            let p = interpolate_p(*c);
            assert!((p / s - 1.0).abs() < 0.1, "{c} -> {p} vs {s}");
        }
    }
}
