//! Slow, direct reference implementations. Nothing here shares code with the
//! library under test.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Two-sample KS statistic by scanning every pooled point.
pub fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0_f64;
    for &x in a.iter().chain(b) {
        let i = a.iter().filter(|&&v| v <= x).count();
        let j = b.iter().filter(|&&v| v <= x).count();
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

/// Mean absolute difference of order statistics (equal sizes only).
pub fn wasserstein_sorted_pairs(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum::<f64>() / a.len() as f64
}

fn mean_pairwise(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += (x - y).abs();
        }
    }
    s / (a.len() * b.len()) as f64
}

/// Energy distance from the three quadratic pairwise means.
pub fn energy_quadratic(a: &[f64], b: &[f64]) -> f64 {
    (2.0 * mean_pairwise(a, b) - mean_pairwise(a, a) - mean_pairwise(b, b))
        .max(0.0)
        .sqrt()
}

/// Least-squares polynomial of `order` through (x, y), evaluated at `at`.
pub fn polyfit_eval(x: &[f64], y: &[f64], order: usize, at: f64) -> f64 {
    let v = DMatrix::from_fn(x.len(), order + 1, |r, c| x[r].powi(c as i32));
    let coef = v
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 1e-14)
        .unwrap();
    (0..=order).map(|k| coef[k] * at.powi(k as i32)).sum()
}

/// Local-level smoother as one dense generalized least-squares solve:
/// minimise `sum (y - x)^2 / r + sum (x_t - x_{t-1})^2 / q`.
pub fn local_level_gls(y: &[f64], q: f64, r: f64) -> Vec<f64> {
    let n = y.len();
    let mut a = DMatrix::<f64>::identity(n, n) / r;
    for t in 1..n {
        a[(t, t)] += 1.0 / q;
        a[(t - 1, t - 1)] += 1.0 / q;
        a[(t, t - 1)] -= 1.0 / q;
        a[(t - 1, t)] -= 1.0 / q;
    }
    let rhs = DVector::from_iterator(n, y.iter().map(|v| v / r));
    a.lu().solve(&rhs).unwrap().iter().copied().collect()
}

/// Sample sorted once, with a per-point label (true = second sample).
pub struct Pooled {
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
    pub m: usize,
    pub n: usize,
}

impl Pooled {
    pub fn new(a: &[f64], b: &[f64]) -> Self {
        let mut pts: Vec<(f64, bool)> =
            a.iter().map(|&v| (v, false)).chain(b.iter().map(|&v| (v, true))).collect();
        pts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        Self {
            values: pts.iter().map(|p| p.0).collect(),
            labels: pts.iter().map(|p| p.1).collect(),
            m: a.len(),
            n: b.len(),
        }
    }

    pub fn split(&self, labels: &[bool]) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(self.m);
        let mut b = Vec::with_capacity(self.n);
        for (v, l) in self.values.iter().zip(labels) {
            if *l {
                b.push(*v)
            } else {
                a.push(*v)
            }
        }
        (a, b)
    }
}

/// Permutation p-value `P(T* >= T_obs)` with labels reshuffled `draws` times.
/// Statistics see the pooled values in ascending order with their labels.
pub fn permutation_p(
    a: &[f64],
    b: &[f64],
    draws: usize,
    seed: u64,
    stat: impl Fn(&[f64], &[bool], usize, usize) -> f64,
) -> f64 {
    let pooled = Pooled::new(a, b);
    let observed = stat(&pooled.values, &pooled.labels, pooled.m, pooled.n);
    let mut labels = pooled.labels.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let tol = 1e-12 * observed.abs().max(1.0);
    let mut hits = 0usize;
    for _ in 0..draws {
        labels.shuffle(&mut rng);
        if stat(&pooled.values, &labels, pooled.m, pooled.n) >= observed - tol {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// KS statistic over sorted pooled values (no ties).
pub fn ks_labelled(_v: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    for l in labels {
        if *l {
            j += 1
        } else {
            i += 1
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    d
}

/// Cramér-von Mises T as the scaled sum of squared ECDF gaps over the pooled points.
pub fn cvm_labelled(_v: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut s = 0.0;
    for l in labels {
        if *l {
            j += 1
        } else {
            i += 1
        }
        s += (i as f64 / m as f64 - j as f64 / n as f64).powi(2);
    }
    let big_n = (m + n) as f64;
    (m * n) as f64 / (big_n * big_n) * s
}

/// Anderson-Darling k-sample statistic for continuous data (Scholz-Stephens A²kN).
pub fn ad_labelled(_v: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let big_n = (m + n) as f64;
    let (mut mi, mut ni) = (0usize, 0usize);
    let (mut sa, mut sb) = (0.0, 0.0);
    for (idx, l) in labels.iter().enumerate().take(labels.len() - 1) {
        if *l {
            ni += 1
        } else {
            mi += 1
        }
        let j = (idx + 1) as f64;
        let den = j * (big_n - j);
        sa += (big_n * mi as f64 - j * m as f64).powi(2) / den;
        sb += (big_n * ni as f64 - j * n as f64).powi(2) / den;
    }
    (sa / m as f64 + sb / n as f64) / big_n
}

/// |U - mn/2| from the rank sum of the first sample (no ties).
pub fn mw_labelled(_v: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let r1: usize = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| !**l)
        .map(|(k, _)| k + 1)
        .sum();
    let u = r1 as f64 - (m * (m + 1)) as f64 / 2.0;
    (u - (m * n) as f64 / 2.0).abs()
}

/// |Welch t| with two-pass variances.
pub fn welch_labelled(v: &[f64], labels: &[bool], m: usize, n: usize) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for (x, l) in v.iter().zip(labels) {
        if *l {
            s2 += x
        } else {
            s1 += x
        }
    }
    let (m, n) = (m as f64, n as f64);
    let (mu1, mu2) = (s1 / m, s2 / n);
    let (mut q1, mut q2) = (0.0, 0.0);
    for (x, l) in v.iter().zip(labels) {
        if *l {
            q2 += (x - mu2).powi(2)
        } else {
            q1 += (x - mu1).powi(2)
        }
    }
    let (v1, v2) = (q1 / (m - 1.0), q2 / (n - 1.0));
    ((mu1 - mu2) / (v1 / m + v2 / n).sqrt()).abs()
}

/// Linear-interpolation quantile (numpy default) of an unsorted sample.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Epps-Singleton W² with a caller-fixed scale; pseudo-inverse via SVD.
pub fn epps_w(a: &[f64], b: &[f64], ts: &[f64]) -> f64 {
    let k = 2 * ts.len();
    let feats = |x: f64| -> Vec<f64> {
        ts.iter()
            .map(|t| (t * x).cos())
            .chain(ts.iter().map(|t| (t * x).sin()))
            .collect()
    };
    let moments = |s: &[f64]| {
        let g: Vec<Vec<f64>> = s.iter().map(|&x| feats(x)).collect();
        let len = s.len() as f64;
        let mean: Vec<f64> = (0..k).map(|c| g.iter().map(|r| r[c]).sum::<f64>() / len).collect();
        let cov = DMatrix::from_fn(k, k, |p, q| {
            g.iter().map(|r| (r[p] - mean[p]) * (r[q] - mean[q])).sum::<f64>() / len
        });
        (DVector::from_vec(mean), cov)
    };
    let (ma, ca) = moments(a);
    let (mb, cb) = moments(b);
    let big_n = (a.len() + b.len()) as f64;
    let cov = ca * (big_n / a.len() as f64) + cb * (big_n / b.len() as f64);
    let pinv = cov.pseudo_inverse(1e-12).unwrap();
    let d = ma - mb;
    big_n * (d.transpose() * pinv * &d)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_sanity() {
        assert_eq!(ks_brute(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]), 1.0);
        assert_eq!(wasserstein_sorted_pairs(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert!((energy_quadratic(&[0.0], &[1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!((polyfit_eval(&[0.0, 2.0], &[0.0, 2.0], 1, 1.0) - 1.0).abs() < 1e-12);
        let s = local_level_gls(&[5.0; 4], 0.3, 2.0);
        assert!(s.iter().all(|v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn labelled_statistics_agree_with_brute_force() {
        let a = [0.3, 1.7, 2.2, 5.0];
        let b = [0.1, 2.0, 4.4];
        let p = Pooled::new(&a, &b);
        assert_eq!(ks_labelled(&p.values, &p.labels, 4, 3), ks_brute(&a, &b));
        // U of the first sample by pair counting
        let u: f64 = a.iter().map(|x| b.iter().filter(|y| x > *y).count() as f64).sum();
        assert_eq!(mw_labelled(&p.values, &p.labels, 4, 3), (u - 6.0).abs());
    }
}
