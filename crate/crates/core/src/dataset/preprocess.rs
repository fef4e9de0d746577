use serde::{Deserialize, Serialize};

use super::{Dtype, TimeSeriesDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", deny_unknown_fields)]
pub enum CleanPolicy {
    #[default]
    DropMissing,
    /// Fill interior gaps of numeric columns, then drop what is still missing.
    Interpolate {
        #[serde(default = "default_order")]
        order: usize,
    },
}

fn default_order() -> usize {
    2
}


pub fn clean(ds: &TimeSeriesDataset, policy: CleanPolicy) -> Result<TimeSeriesDataset> {
    if let Some(c) = ds
        .columns
        .iter()
        .find(|c| !c.values.is_empty() && c.missing_count() == c.values.len())
    {
        return Err(Error::AllMissing(c.name.clone()));
    }

    let mut work = ds.clone();
    if let CleanPolicy::Interpolate { order } = policy {
        for c in work.columns.iter_mut() {
            if c.dtype == Dtype::Numeric && c.missing_count() > 0 {
                c.values = polynomial_interpolate(&c.values, order).map_err(|e| match e {
                    Error::InsufficientData(msg) => {
                        Error::InsufficientData(format!("column {}: {msg}", c.name))
                    }
                    other => other,
                })?;
            }
        }
    }

    let keep: Vec<bool> = (0..work.row_count())
        .map(|i| work.columns.iter().all(|c| !c.values[i].is_nan()))
        .collect();
    let out = work.filter_rows(&keep);

    for c in out.columns.iter().filter(|c| c.dtype == Dtype::Binary) {
        if let Some(v) = c.values.iter().find(|v| **v != 0.0 && **v != 1.0) {
            return Err(Error::Schema(format!(
                "binary column {} contains {v}",
                c.name
            )));
        }
    }
    Ok(out)
}

/// Fill interior NaN gaps with a local least-squares polynomial.
///
/// Each missing point is estimated from the `2 * (order + 1)` nearest known
/// points (fewer if the series has fewer), fitted in index space. Leading and
/// trailing gaps are left as NaN.
pub fn polynomial_interpolate(values: &[f64], order: usize) -> Result<Vec<f64>> {
    let known: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_nan()).collect();
    if known.len() < order + 1 {
        return Err(Error::InsufficientData(format!(
            "{} known points, order {order} needs {}",
            known.len(),
            order + 1
        )));
    }
    let (first, last) = (known[0], *known.last().unwrap());
    let want = (2 * (order + 1)).min(known.len());

    let mut out = values.to_vec();
    let mut xs = Vec::with_capacity(want);
    let mut ys = Vec::with_capacity(want);
    for i in first..=last {
        if !values[i].is_nan() {
            continue;
        }
        // expand outwards from the gap; ties go left
        let mut right = known.partition_point(|&k| k < i);
        let mut left = right;
        xs.clear();
        ys.clear();
        while xs.len() < want {
            let take_left = match (left > 0, right < known.len()) {
                (true, true) => i - known[left - 1] <= known[right] - i,
                (l, _) => l,
            };
            let k = if take_left {
                left -= 1;
                known[left]
            } else {
                right += 1;
                known[right - 1]
            };
            xs.push(k as f64 - i as f64);
            ys.push(values[k]);
        }
        out[i] = fit_at_origin(&xs, &ys, order);
    }
    Ok(out)
}

/// Least-squares polynomial of degree `order` through (xs, ys), evaluated at 0.
fn fit_at_origin(xs: &[f64], ys: &[f64], order: usize) -> f64 {
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let dim = order + 1;
    // normal equations on scaled abscissae
    let mut a = vec![vec![0.0; dim + 1]; dim];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        let mut powers = vec![1.0; dim];
        for p in 1..dim {
            powers[p] = powers[p - 1] * u;
        }
        for r in 0..dim {
            for c in 0..dim {
                a[r][c] += powers[r] * powers[c];
            }
            a[r][dim] += powers[r] * y;
        }
    }
    solve_augmented(&mut a)[0]
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_augmented(a: &mut [Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let f = row[col] / pivot_row[col];
            for (r, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *r -= f * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}
