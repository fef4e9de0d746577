//! Distribution tails used by the tests. Regularised gamma/beta functions
//! come from statrs; the Kolmogorov and Cramér-von-Mises limit laws and
//! the Bessel function they need are evaluated here.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Jacobi theta form converges fast for small arguments
        let f = -PI * PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            let term = (f * odd * odd).exp();
            cdf += term;
            if term < 1e-17 * cdf {
                break;
            }
        }
        (1.0 - (2.0 * PI).sqrt() / x * cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-300 || term < 1e-17 * sum.abs() {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

/// Two-sided Student-t tail `P(|T| >= |t|)` with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x)
}

/// Modified Bessel function of the second kind, `K_nu(x)` for `x > 0`, from
/// `K_nu(x) = integral_0^inf exp(-x cosh t) cosh(nu t) dt`. The integrand is
/// analytic and doubly-exponentially decaying, so the trapezoid rule
/// converges geometrically.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k needs a positive argument");
    // integrand falls below e^-745 once x cosh t > 745 + nu t
    let t_max = ((800.0 / x).max(1.0) * 2.0).ln() + 2.0;
    let h = 0.01_f64.min(t_max / 200.0);
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut sum = 0.5 * f(0.0);
    for i in 1..=steps {
        sum += f(i as f64 * h);
    }
    sum * h
}

/// CDF of the limiting Cramér-von-Mises distribution.
pub fn cvm_limit_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let u = (ln_gamma(kf + 0.5) - ln_gamma(kf + 1.0)).exp() / (PI.powf(1.5) * x.sqrt());
        let y = 4.0 * kf + 1.0;
        let q = y * y / (16.0 * x);
        if q > 700.0 {
            break;
        }
        let term = u * y.sqrt() * (-q).exp() * bessel_k(0.25, q);
        total += term;
        if term.abs() < 1e-7 {
            break;
        }
    }
    total
}

/// `P(Binom(n, 1/2) >= k)`, exact up to floating-point summation.
pub fn binomial_half_upper_tail(n: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if n <= 1000 {
        // walk down from P(X = n) = 2^-n with the pmf ratio
        let mut term = 0.5f64.powi(n as i32);
        let mut total = term;
        for j in (k + 1..=n).rev() {
            term *= j as f64 / (n - j + 1) as f64;
            total += term;
        }
        return total.min(1.0);
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let ln_choose = |j: u64| {
        ln_gamma(n as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0)
    };
    // sum from the largest term outward in log space
    let terms: Vec<f64> = (k..=n).map(|j| ln_choose(j) + ln_half_n).collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + s.ln()).exp().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_branches_agree_at_switch() {
        // both series are valid everywhere; compare them at the switch point
        let x: f64 = 1.18;
        let mut alt = 0.0;
        let mut sign = 1.0;
        for k in 1..50 {
            let kf = k as f64;
            alt += sign * (-2.0 * kf * kf * x * x).exp();
            sign = -sign;
        }
        assert!((kolmogorov_sf(1.1799999) - 2.0 * alt).abs() < 1e-7);
        // reference value P(K > 1.36) ~= 0.0494
        assert!((kolmogorov_sf(1.36) - 0.049_446).abs() < 1e-4);
    }

    #[test]
    fn bessel_k_half_closed_form() {
        // K_{1/2}(x) = sqrt(pi / (2x)) e^{-x}
        for &x in &[0.01, 0.3, 1.0, 5.0, 40.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let got = bessel_k(0.5, x);
            assert!(((got - exact) / exact).abs() < 1e-10, "x={x} {got} {exact}");
        }
    }

    #[test]
    fn cvm_limit_quantiles() {
        // classical upper percentage points of the omega^2 limit law
        assert!((1.0 - cvm_limit_cdf(0.461_36) - 0.05).abs() < 1e-4);
        assert!((1.0 - cvm_limit_cdf(0.743_35) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn binomial_tail_small_cases() {
        assert_eq!(binomial_half_upper_tail(4, 0), 1.0);
        assert!((binomial_half_upper_tail(4, 3) - 5.0 / 16.0).abs() < 1e-15);
        assert!((binomial_half_upper_tail(4, 4) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn student_t_reference() {
        // t = 2.228 with 10 df is the two-sided 5% point
        assert!((student_t_two_sided(2.228_138_85, 10.0) - 0.05).abs() < 1e-8);
    }
}
