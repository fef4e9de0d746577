use super::special::normal_sf;
use super::{check_samples, MethodId, MethodOutput};
use crate::error::Result;

/// Average ranks (1-based) of `values`, ties sharing the mean of their ranks.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let r = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Sizes of tie groups in `values`.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = 0;
    while start < v.len() {
        let mut end = start + 1;
        while end < v.len() && v[end] == v[start] {
            end += 1;
        }
        out.push(end - start);
        start = end;
    }
    out
}

/// Up to this pooled size the null distribution is enumerated exactly.
const EXACT_LIMIT: usize = 10;

/// Mann-Whitney U test, two-sided. `statistic` is `U` of the reference sample.
pub fn mann_whitney_u(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let (m, n) = (reference.len(), current.len());
    let pooled: Vec<f64> = reference.iter().chain(current).copied().collect();
    let ranks = midranks(&pooled);
    let u_of = |ref_ranks: &[f64]| {
        ref_ranks.iter().sum::<f64>() - (m * (m + 1)) as f64 / 2.0
    };
    let u = u_of(&ranks[..m]);
    let mean = (m * n) as f64 / 2.0;
    let dev = (u - mean).abs();

    let p = if m + n <= EXACT_LIMIT {
        exact_two_sided(&ranks, m, mean, dev)
    } else {
        let big_n = (m + n) as f64;
        let tie_term: f64 = tie_sizes(&pooled)
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum();
        let var = (m * n) as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = (dev - 0.5) / var.sqrt();
            (2.0 * normal_sf(z)).min(1.0)
        }
    };
    Ok(MethodOutput::p_value(MethodId::MannWhitney, u, p))
}

/// Enumerate every assignment of `m` of the pooled ranks to the reference.
fn exact_two_sided(ranks: &[f64], m: usize, mean: f64, observed_dev: f64) -> f64 {
    let total = ranks.len();
    let offset = (m * (m + 1)) as f64 / 2.0;
    let (mut hits, mut count) = (0u64, 0u64);
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let rank_sum: f64 = (0..total)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ranks[i])
            .sum();
        count += 1;
        // half-integer arithmetic is exact in f64
        if ((rank_sum - offset) - mean).abs() >= observed_dev {
            hits += 1;
        }
    }
    hits as f64 / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn exact_small_case() {
        let out = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!((out.drift_value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn swap_symmetry_exact() {
        let a: Vec<f64> = (0..40).map(|i| (i * 17 % 23) as f64).collect();
        let b: Vec<f64> = (0..55).map(|i| (i * 11 % 29) as f64 + 0.5).collect();
        let p1 = mann_whitney_u(&a, &b).unwrap().drift_value;
        let p2 = mann_whitney_u(&b, &a).unwrap().drift_value;
        assert_eq!(p1, p2);
    }

    #[test]
    fn identical_samples_p_one() {
        let a: Vec<f64> = (0..100).map(|i| (i * 7 % 31) as f64).collect();
        assert!((mann_whitney_u(&a, &a).unwrap().drift_value - 1.0).abs() < 0.02);
    }
}
