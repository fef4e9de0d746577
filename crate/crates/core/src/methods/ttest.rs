use super::special::student_t_two_sided;
use super::{check_samples, mean_var, MethodId, MethodOutput};
use crate::error::Result;

/// Welch's unequal-variance t-test, two-sided.
///
/// When both samples have zero variance the test is degenerate: p is 1 for
/// equal means and 0 otherwise, and the output is flagged.
pub fn t_test(reference: &[f64], current: &[f64]) -> Result<MethodOutput> {
    check_samples(reference, current, 2)?;
    let (m1, v1) = mean_var(reference, 1);
    let (m2, v2) = mean_var(current, 1);
    let (n1, n2) = (reference.len() as f64, current.len() as f64);
    let se1 = v1 / n1;
    let se2 = v2 / n2;
    let se = se1 + se2;
    if se == 0.0 {
        let p = if m1 == m2 { 1.0 } else { 0.0 };
        let t = if m1 == m2 { 0.0 } else { f64::INFINITY.copysign(m1 - m2) };
        let mut out = MethodOutput::p_value(MethodId::TTest, t, p);
        out.drift_value = p;
        out.degenerate = true;
        return Ok(out);
    }
    let t = (m1 - m2) / se.sqrt();
    let df = se * se / (se1 * se1 / (n1 - 1.0) + se2 * se2 / (n2 - 1.0));
    let p = student_t_two_sided(t, df);
    Ok(MethodOutput::p_value(MethodId::TTest, t, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_means() {
        let out = t_test(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!((out.drift_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_equal_constants() {
        let out = t_test(&[4.0; 5], &[4.0; 3]).unwrap();
        assert_eq!(out.drift_value, 1.0);
        assert!(out.degenerate);
    }

    #[test]
    fn degenerate_different_constants() {
        let out = t_test(&[4.0; 5], &[5.0; 3]).unwrap();
        assert_eq!(out.drift_value, 0.0);
        assert!(out.degenerate);
    }

    #[test]
    fn needs_two_observations() {
        assert!(t_test(&[1.0], &[1.0, 2.0]).is_err());
    }
}
