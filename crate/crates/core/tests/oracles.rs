use driftbench_core::dataset::{
    growth_rate, kalman_smooth, polynomial_interpolate, MovingAverageConfig,
};
use driftbench_core::methods::{energy_distance, ks_two_sample, t_test, wasserstein_1d};
use driftbench_core::synth::{generate, Scenario, SynthConfig};
use driftbench_testkit as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn sample(rng: &mut ChaCha8Rng, n: usize, shift: f64, scale: f64) -> Vec<f64> {
    let d = Normal::new(shift, scale).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

#[test]
fn ks_statistic_equals_brute_force_sup() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let m = rng.random_range(1..=1000);
        let n = rng.random_range(1..=1000);
        // every fourth case draws from a coarse grid to force ties
        let (a, b): (Vec<f64>, Vec<f64>) = if case % 4 == 0 {
            (
                (0..m).map(|_| rng.random_range(0..20) as f64).collect(),
                (0..n).map(|_| rng.random_range(0..20) as f64).collect(),
            )
        } else {
            let shift = rng.random_range(-1.0..1.0);
            (sample(&mut rng, m, 0.0, 1.0), sample(&mut rng, n, shift, 1.0))
        };
        let got = ks_two_sample(&a, &b).unwrap().statistic;
        assert_eq!(got, oracle::ks_brute(&a, &b), "case {case}");
    }
}

#[test]
fn wasserstein_equals_sorted_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let n = rng.random_range(1..=800);
        let a = sample(&mut rng, n, 0.0, 2.0);
        let b = sample(&mut rng, n, 0.7, 1.0);
        let got = wasserstein_1d(&a, &b, false).unwrap().drift_value;
        assert!((got - oracle::wasserstein_sorted_pairs(&a, &b)).abs() <= 1e-12);
    }
}

#[test]
fn energy_distance_equals_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let m = rng.random_range(1..=500);
        let n = rng.random_range(1..=500);
        let a = sample(&mut rng, m, 0.0, 1.0);
        let b = sample(&mut rng, n, 0.3, 1.5);
        let got = energy_distance(&a, &b).unwrap().drift_value;
        assert!((got - oracle::energy_quadratic(&a, &b)).abs() <= 1e-10);
    }
}

#[test]
fn quadratic_fill_matches_least_squares_fit() {
    let filled = polynomial_interpolate(&[0.0, 1.0, f64::NAN, 9.0], 2).unwrap();
    let expect = oracle::polyfit_eval(&[0.0, 1.0, 3.0], &[0.0, 1.0, 9.0], 2, 2.0);
    assert!((filled[2] - expect).abs() < 1e-12);
    assert_eq!(&filled[..2], &[0.0, 1.0]);
    assert_eq!(filled[3], 9.0);
}

#[test]
fn kalman_matches_dense_smoother() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let y: Vec<f64> = (0..20).map(|t| 0.5 * t as f64 + noise.sample(&mut rng)).collect();
    let got = kalman_smooth(&y, 0.01, 1.0).unwrap();
    let expect = oracle::local_level_gls(&y, 0.01, 1.0);
    for (g, e) in got.iter().zip(&expect) {
        assert!((g - e).abs() < 1e-8, "{g} vs {e}");
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    assert!(var(&got) <= var(&y));
}

#[test]
fn growth_rate_matches_raw_mean_ratio() {
    let (split, _) = generate(&SynthConfig::new(Scenario::Uc2Dataset, 5)).unwrap();
    let (r, c) = split.variable("consumption").unwrap();
    let raw = (c.iter().sum::<f64>() / c.len() as f64) / (r.iter().sum::<f64>() / r.len() as f64);
    let one = MovingAverageConfig::new(1);
    let got = growth_rate(&split, "consumption", one, one).unwrap();
    assert!((got - raw).abs() < 1e-12);
    assert!((got - 1.29).abs() < 0.03, "ratio {got}");
    // smoothing windows barely move the ratio on a long series
    let week = MovingAverageConfig::new(168);
    let smoothed = growth_rate(&split, "consumption", week, week).unwrap();
    assert!((smoothed - raw).abs() < 0.01);
}

#[test]
fn welch_closed_form_far_apart() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let cur = sample(&mut rng, 50, 0.0, 1e-3);
    let reference: Vec<f64> = cur.iter().map(|x| x + 1000.0).collect();
    let out = t_test(&reference, &cur).unwrap();
    let t = oracle::welch_labelled(
        &reference.iter().chain(&cur).copied().collect::<Vec<_>>(),
        &std::iter::repeat_n(false, 50).chain(std::iter::repeat_n(true, 50)).collect::<Vec<_>>(),
        50,
        50,
    );
    assert!((out.statistic.abs() - t).abs() / t < 1e-9);
    assert!(out.drift_value < 1e-6);
}
