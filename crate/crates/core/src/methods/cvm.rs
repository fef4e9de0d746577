use super::ranks::midranks;
use super::special::cvm_limit_cdf;
use super::{check_samples, sorted, MethodId, MethodOutput};
use crate::error::Result;

/// Two-sample Cramér-von-Mises criterion `T` (Anderson's form) computed from
/// pooled midranks.
pub(crate) fn cvm_statistic_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (nx, ny) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = midranks(&pooled);
    let ssq = |ranks: &[f64]| {
        ranks
            .iter()
            .enumerate()
            .map(|(i, r)| (r - (i + 1) as f64).powi(2))
            .sum::<f64>()
    };
    let u = nx as f64 * ssq(&r[..nx]) + ny as f64 * ssq(&r[nx..]);
    let k = (nx * ny) as f64;
    let n = (nx + ny) as f64;
    u / (k * n) - (4.0 * k - 1.0) / (6.0 * n)
}

/// Cramér-von-Mises two-sample test. The statistic is standardised with its
/// exact finite-sample mean and variance and referred to the limiting
/// one-sample distribution. p is clamped to `[1e-16, 1]`.
pub fn cvm_two_sample(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 1)?;
    let a = sorted(reference);
    let b = sorted(current);
    let t = cvm_statistic_sorted(&a, &b);

    let (nx, ny) = (a.len() as f64, b.len() as f64);
    let k = nx * ny;
    let n = nx + ny;
    let mean = (1.0 + 1.0 / n) / 6.0;
    let var = (n + 1.0) * (4.0 * k * n - 3.0 * (nx * nx + ny * ny) - 2.0 * k)
        / (45.0 * n * n * 4.0 * k);
    let tn = if var > 0.0 {
        1.0 / 6.0 + (t - mean) / (45.0 * var).sqrt()
    } else {
        0.0
    };
    let p = if tn < 0.003 {
        1.0
    } else {
        (1.0 - cvm_limit_cdf(tn)).max(0.0)
    };
    Ok(MethodOutput::p_value(MethodId::Cvm, t, p.clamp(1e-16, 1.0)))
}
