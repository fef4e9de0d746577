use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::special::binomial_half_upper_tail;
use super::{MethodId, MethodOutput};
use crate::error::{Error, Result};

pub const MIN_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpotParams {
    pub holdout_frac: f64,
    pub iterations: usize,
    pub step: f64,
    pub l2: f64,
}

impl Default for SpotParams {
    fn default() -> Self {
        Self {
            holdout_frac: 0.25,
            iterations: 500,
            step: 0.1,
            l2: 1e-3,
        }
    }
}

fn validate(frame: &[&[f64]], side: &str) -> Result<usize> {
    let rows = frame.first().map_or(0, |c| c.len());
    if frame.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidArgument(format!("{side} columns differ in length")));
    }
    if frame.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument(format!("{side} frame has non-finite values")));
    }
    if rows < MIN_ROWS {
        return Err(Error::InsufficientData(format!(
            "classifier test needs at least {MIN_ROWS} {side} rows (got {rows})"
        )));
    }
    Ok(rows)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Classifier two-sample test over whole frames given column-wise.
///
/// Reference rows are labelled 0 and current rows 1. The statistic is the
/// held-out accuracy and the drift value the exact binomial tail probability
/// of reaching it by chance.
pub fn spot_the_difference(
    reference: &[&[f64]],
    current: &[&[f64]],
    params: &SpotParams,
    seed: u64,
) -> Result<MethodOutput> {
    if reference.is_empty() || reference.len() != current.len() {
        return Err(Error::InvalidArgument(
            "reference and current frames need the same non-zero column count".into(),
        ));
    }
    if !(params.holdout_frac > 0.0 && params.holdout_frac < 1.0) {
        return Err(Error::InvalidArgument("holdout fraction must lie in (0, 1)".into()));
    }
    let nr = validate(reference, "reference")?;
    let nc = validate(current, "current")?;
    let n = nr.min(nc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let keep = |len: usize, rng: &mut ChaCha8Rng| {
        if len == n {
            (0..n).collect::<Vec<_>>()
        } else {
            let mut idx = index::sample(rng, len, n).into_vec();
            idx.sort_unstable();
            idx
        }
    };
    let ref_rows = keep(nr, &mut rng);
    let cur_rows = keep(nc, &mut rng);
    // one permutation for both sides keeps the two classes stratified
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_hold = ((n as f64 * params.holdout_frac).round() as usize).clamp(1, n - 1);
    let (hold, train) = order.split_at(n_hold);

    let dim = reference.len();
    let row = |frame: &[&[f64]], i: usize| -> Vec<f64> { frame.iter().map(|c| c[i]).collect() };
    let gather = |positions: &[usize]| {
        let mut xs = Vec::with_capacity(2 * positions.len());
        let mut ys = Vec::with_capacity(2 * positions.len());
        for &p in positions {
            xs.push(row(reference, ref_rows[p]));
            ys.push(0.0);
            xs.push(row(current, cur_rows[p]));
            ys.push(1.0);
        }
        (xs, ys)
    };
    let (mut x_train, y_train) = gather(train);
    let (mut x_hold, y_hold) = gather(hold);

    let m = x_train.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for x in &x_train {
        for j in 0..dim {
            mean[j] += x[j] / m;
        }
    }
    for x in &x_train {
        for j in 0..dim {
            sd[j] += (x[j] - mean[j]).powi(2) / m;
        }
    }
    for s in &mut sd {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    for x in x_train.iter_mut().chain(x_hold.iter_mut()) {
        for j in 0..dim {
            x[j] = (x[j] - mean[j]) / sd[j];
        }
    }

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut grad = vec![0.0; dim];
    for _ in 0..params.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, y) in x_train.iter().zip(&y_train) {
            let z: f64 = b + x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let r = sigmoid(z) - y;
            for j in 0..dim {
                grad[j] += r * x[j];
            }
            grad_b += r;
        }
        for j in 0..dim {
            w[j] -= params.step * (grad[j] / m + params.l2 * w[j]);
        }
        b -= params.step * grad_b / m;
    }

    let correct = x_hold
        .iter()
        .zip(&y_hold)
        .filter(|(x, y)| {
            let z: f64 = b + x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            (z > 0.0) == (**y == 1.0)
        })
        .count();
    let total = x_hold.len();
    let accuracy = correct as f64 / total as f64;
    let p = binomial_half_upper_tail(total as u64, correct as u64);
    Ok(MethodOutput::p_value(MethodId::SpotTheDifference, accuracy, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_copy_is_chance() {
        let a: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let out = spot_the_difference(&[&a], &[&a], &SpotParams::default(), 3).unwrap();
        assert_eq!(out.statistic, 0.5);
        assert!(out.drift_value >= 0.5);
    }

    #[test]
    fn too_few_rows() {
        let a = vec![0.0; 10];
        assert!(matches!(
            spot_the_difference(&[&a], &[&a], &SpotParams::default(), 0),
            Err(Error::InsufficientData(_))
        ));
    }
}
