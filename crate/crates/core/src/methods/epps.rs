use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::special::chi2_sf;
use super::{quantile_sorted, sorted, MethodId, MethodOutput};
use crate::error::{Error, Result};

pub const DEFAULT_T_POINTS: (f64, f64) = (0.4, 0.8);

/// Epps-Singleton test on the empirical characteristic function evaluated at
/// `t_points`, scaled by the pooled semi-interquartile range.
pub fn epps_singleton(
    reference: &[f64],
    current: &[f64],
    t_points: (f64, f64),
) -> Result<MethodOutput> {
    let (nx, ny) = (reference.len(), current.len());
    if nx < 5 || ny < 5 {
        return Err(Error::InsufficientData(format!(
            "Epps-Singleton needs at least 5 observations per sample (got {nx} and {ny})"
        )));
    }
    if reference.iter().chain(current).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    if !(t_points.0 > 0.0 && t_points.1 > 0.0) {
        return Err(Error::InvalidArgument("t points must be positive".into()));
    }
    let pooled: Vec<f64> = reference.iter().chain(current).copied().collect();
    let pooled = sorted(&pooled);
    let siqr = (quantile_sorted(&pooled, 0.75) - quantile_sorted(&pooled, 0.25)) / 2.0;
    if siqr == 0.0 {
        return Err(Error::SingularCovariance(
            "pooled semi-interquartile range is zero".into(),
        ));
    }
    let ts = [t_points.0 / siqr, t_points.1 / siqr];
    let dim = 2 * ts.len();

    let features = |x: f64| {
        let mut g = [0.0; 4];
        for (k, t) in ts.iter().enumerate() {
            g[k] = (t * x).cos();
            g[k + ts.len()] = (t * x).sin();
        }
        g
    };
    // mean vector and biased covariance of the feature map
    let moments = |sample: &[f64]| {
        let n = sample.len() as f64;
        let mut mean = DVector::<f64>::zeros(dim);
        let rows: Vec<[f64; 4]> = sample.iter().map(|&x| features(x)).collect();
        for g in &rows {
            for k in 0..dim {
                mean[k] += g[k];
            }
        }
        mean /= n;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for g in &rows {
            for a in 0..dim {
                let da = g[a] - mean[a];
                for b in 0..dim {
                    cov[(a, b)] += da * (g[b] - mean[b]);
                }
            }
        }
        cov /= n;
        (mean, cov)
    };
    let (mx, cx) = moments(reference);
    let (my, cy) = moments(current);
    let n = (nx + ny) as f64;
    let est_cov = cx * (n / nx as f64) + cy * (n / ny as f64);

    let eig = SymmetricEigen::new(est_cov);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = max_ev * 1e-10;
    let rank = eig.eigenvalues.iter().filter(|&&v| v > tol).count();
    if rank < dim {
        return Err(Error::SingularCovariance(format!(
            "estimated covariance has rank {rank} < {dim}"
        )));
    }
    let diff = mx - my;
    // pseudo-inverse quadratic form through the eigenbasis
    let proj = eig.eigenvectors.transpose() * &diff;
    let quad: f64 = proj
        .iter()
        .zip(eig.eigenvalues.iter())
        .filter(|(_, &ev)| ev > tol)
        .map(|(p, ev)| p * p / ev)
        .sum();
    let mut w = n * quad;
    if nx.min(ny) < 25 {
        let corr = 1.0 / (1.0 + n.powf(-0.45) + 10.1 * ((nx as f64).powf(-1.7) + (ny as f64).powf(-1.7)));
        w *= corr;
    }
    let p = chi2_sf(w, rank as f64);
    Ok(MethodOutput::p_value(MethodId::EppsSingleton, w, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_data_is_singular() {
        let r: Vec<f64> = (0..200).map(|i| f64::from(i % 3 == 0)).collect();
        let c: Vec<f64> = (0..150).map(|i| f64::from(i % 2 == 0)).collect();
        assert!(matches!(
            epps_singleton(&r, &c, DEFAULT_T_POINTS),
            Err(Error::SingularCovariance(_))
        ));
    }

    #[test]
    fn small_samples_rejected() {
        assert!(matches!(
            epps_singleton(&[1.0, 2.0, 3.0, 4.0], &[1.0; 10], DEFAULT_T_POINTS),
            Err(Error::InsufficientData(_))
        ));
    }
}
