use serde::{Deserialize, Serialize};

use super::ReferenceCurrentSplit;
use crate::error::{Error, Result};

/// Trailing simple moving average over `window` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingAverageConfig {
    pub window: usize,
}

impl MovingAverageConfig {
    pub fn new(window: usize) -> Self {
        Self { window }
    }
}

pub fn moving_average(values: &[f64], cfg: MovingAverageConfig) -> Result<Vec<f64>> {
    let p = cfg.window;
    if p == 0 {
        return Err(Error::InvalidArgument("moving-average window must be >= 1".into()));
    }
    if p > values.len() {
        return Err(Error::InvalidArgument(format!(
            "window {p} exceeds series length {}",
            values.len()
        )));
    }
    if p == 1 {
        return Ok(values.to_vec());
    }
    // windowed sums recomputed per output keep the result free of drift
    Ok(values
        .windows(p)
        .map(|w| w.iter().sum::<f64>() / p as f64)
        .collect())
}

/// Ratio of the smoothed current mean to the smoothed reference mean.
pub fn growth_rate(
    split: &ReferenceCurrentSplit,
    variable: &str,
    cfg_ref: MovingAverageConfig,
    cfg_cur: MovingAverageConfig,
) -> Result<f64> {
    let (reference, current) = split.variable(variable)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ref_mean = mean(&moving_average(reference, cfg_ref)?);
    let cur_mean = mean(&moving_average(current, cfg_cur)?);
    if ref_mean == 0.0 {
        return Err(Error::Degenerate(format!(
            "smoothed reference mean of {variable} is zero"
        )));
    }
    Ok(cur_mean / ref_mean)
}

/// Fixed-interval smoother for the local-level model
/// `x[t] = x[t-1] + w`, `y[t] = x[t] + v`, `w ~ N(0, q)`, `v ~ N(0, r)`.
///
/// The initial level is diffuse, so the result is the minimiser of
/// `sum (y - x)^2 / r + sum (x[t] - x[t-1])^2 / q`.
pub fn kalman_smooth(values: &[f64], q: f64, r: f64) -> Result<Vec<f64>> {
    if !(q > 0.0 && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variances must be positive (q={q}, r={r})"
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite value at position {i}"
        )));
    }
    let n = values.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut level = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    // diffuse prior: the first observation fixes the level with variance r
    level.push(values[0]);
    var.push(r);
    for &y in &values[1..] {
        let a = *level.last().unwrap();
        let p = var.last().unwrap() + q;
        let gain = p / (p + r);
        level.push(a + gain * (y - a));
        var.push((1.0 - gain) * p);
    }
    let mut smooth = level.clone();
    for t in (0..n - 1).rev() {
        let c = var[t] / (var[t] + q);
        smooth[t] = level[t] + c * (smooth[t + 1] - level[t]);
    }
    Ok(smooth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_examples() {
        let ma = |v: &[f64], p| moving_average(v, MovingAverageConfig::new(p)).unwrap();
        assert_eq!(ma(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.5, 2.5, 3.5]);
        assert_eq!(ma(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3), vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(ma(&[3.0, -1.0, 7.0], 1), vec![3.0, -1.0, 7.0]);
    }

    #[test]
    fn window_longer_than_series() {
        assert!(moving_average(&[1.0, 2.0], MovingAverageConfig::new(3)).is_err());
    }

    #[test]
    fn kalman_constant_fixed_point() {
        let out = kalman_smooth(&[5.0; 4], 0.3, 2.0).unwrap();
        assert_eq!(out, vec![5.0; 4]);
    }

    #[test]
    fn kalman_exact_observation_limit() {
        let y = [1.0, 4.0, -2.0, 3.5, 0.25];
        let out = kalman_smooth(&y, 0.01, 1e-12).unwrap();
        for (a, b) in out.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn kalman_rejects_nan() {
        assert!(kalman_smooth(&[1.0, f64::NAN], 0.01, 1.0).is_err());
    }
}
