use std::collections::BTreeMap;

use driftbench_core::chunking::{
    chunk_drift_ratio, chunk_verdict, chunked_detect, Chunk, ChunkResult, ChunkSpec,
};
use driftbench_core::decision::{classify_group, GroundTruthDriftSpec, Group, ShiftKind, ThresholdSpec};
use driftbench_core::methods::{ks_two_sample, spot_the_difference, MethodId, MethodParams, SpotParams};
use driftbench_core::par::Parallelism;
use driftbench_core::pipeline::{detect, DetectConfig, KS_EXACT_CUTOFF};
use driftbench_core::synth::{
    generate, inject, DriftInjection, InjectionKind, Onset, Scenario, SynthConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn normals(seed: u64, n: usize, shift: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(shift, 1.0).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

fn flagged(count: usize, of: usize) -> Vec<ChunkResult> {
    use driftbench_core::methods::MethodOutput;
    (0..of)
        .map(|i| ChunkResult {
            chunk: Chunk {
                key: format!("chunk-{i}"),
                start_time: i as i64,
                end_time: i as i64,
                begin: i,
                end: i + 1,
            },
            variable: "x".into(),
            method: MethodId::Ks,
            output: Some(MethodOutput::statistic(MethodId::Ks, 0.0)),
            drift_flag: Some(i < count),
            note: None,
        })
        .collect()
}

#[test]
fn chunk_ratio_rule() {
    for (count, ratio, verdict) in [(2, 0.2, false), (10, 1.0, true), (5, 0.5, true)] {
        let r = chunk_drift_ratio(&flagged(count, 10)).unwrap();
        assert_eq!(r, ratio);
        assert_eq!(chunk_verdict(r), verdict);
    }
}

#[test]
fn group_examples() {
    let truth = GroundTruthDriftSpec::new(
        [("co2".to_string(), true), ("temperature".to_string(), true), ("occupancy".to_string(), false)],
        Some("occupancy"),
        Some(ShiftKind::Concept),
    )
    .unwrap();
    let flags = |c, t, o| {
        BTreeMap::from([
            ("co2".to_string(), c),
            ("temperature".to_string(), t),
            ("occupancy".to_string(), o),
        ])
    };
    assert_eq!(classify_group(&flags(true, true, false), &truth).unwrap(), Group::One);
    assert_eq!(classify_group(&flags(true, true, true), &truth).unwrap(), Group::Two);
    assert_eq!(classify_group(&flags(false, true, false), &truth).unwrap(), Group::Three);
}

#[test]
fn null_chunks_rarely_flag_under_js() {
    let mut clean = 0;
    for seed in 0..100 {
        let mut cfg = SynthConfig::new(Scenario::Custom, seed);
        cfg.rows = Some(20_000);
        cfg.custom.variables = 1;
        let (split, _) = generate(&cfg).unwrap();
        let det = chunked_detect(
            &split,
            "x1",
            MethodId::JensenShannon,
            &ChunkSpec::Count { count: 10 },
            &ThresholdSpec::distance_right(),
            &MethodParams::default(),
            KS_EXACT_CUTOFF,
            Parallelism::Parallel,
        )
        .unwrap();
        if det.results.iter().all(|r| r.drift_flag == Some(false)) {
            clean += 1;
        }
    }
    assert!(clean >= 95, "{clean}/100 seeds clean");
}

#[test]
fn post_onset_chunks_always_caught() {
    for seed in 0..20 {
        let mut cfg = SynthConfig::new(Scenario::Custom, seed);
        cfg.rows = Some(10_000);
        cfg.custom.variables = 1;
        cfg.injections.push(DriftInjection::abrupt("x1", 1.0, Onset::Fraction(0.8)));
        let (split, truth) = generate(&cfg).unwrap();
        assert!(truth.flags["x1"]);
        let det = chunked_detect(
            &split,
            "x1",
            MethodId::Ks,
            &ChunkSpec::Count { count: 10 },
            &ThresholdSpec::sigma_band(),
            &MethodParams::default(),
            KS_EXACT_CUTOFF,
            Parallelism::Parallel,
        )
        .unwrap();
        assert!(det.results[8..].iter().all(|r| r.drift_flag == Some(true)), "seed {seed}");
        assert!(det.ratio().unwrap() >= 0.2);
    }
}

#[test]
fn classifier_null_and_power() {
    let params = SpotParams::default();
    let (mut null_ok, mut power_ok) = (0, 0);
    for seed in 0..100 {
        let a = normals(seed, 500, 0.0);
        let b = normals(seed + 1000, 500, 0.0);
        let c = normals(seed + 2000, 500, 5.0);
        if spot_the_difference(&[&a], &[&b], &params, seed).unwrap().drift_value > 0.05 {
            null_ok += 1;
        }
        if spot_the_difference(&[&a], &[&c], &params, seed).unwrap().drift_value < 0.05 {
            power_ok += 1;
        }
    }
    assert!(null_ok >= 90, "null {null_ok}");
    assert!(power_ok >= 95, "power {power_ok}");
}

#[test]
fn uc1_moments() {
    let (split, truth) = generate(&SynthConfig::new(Scenario::Uc1Concept, 3)).unwrap();
    assert_eq!(truth.target.as_deref(), Some("occupancy"));
    let (ro, co) = split.variable("occupancy").unwrap();
    assert!((mean(ro) - mean(co)).abs() < 0.02);
    let (rt, ct) = split.variable("temperature").unwrap();
    assert!((mean(ct) - mean(rt)).abs() >= std(rt));
}

#[test]
fn injection_moments() {
    let n = 20_000;
    let base = normals(9, n, 0.0);
    let times: Vec<i64> = (0..n as i64).collect();
    let step = inject(&base, &times, &DriftInjection::abrupt("x", 5.0, Onset::Fraction(0.5)), 1.0).unwrap();
    let se = 3.0 * (2.0 / (n as f64 / 2.0)).sqrt();
    let jump = mean(&step[n / 2..]) - mean(&step[..n / 2]);
    assert!((jump - 5.0).abs() < se, "jump {jump}");

    let recurring = DriftInjection {
        kind: InjectionKind::Recurring,
        target_variable: "x".into(),
        magnitude: 2.0,
        onset: Onset::Fraction(0.0),
        period: Some(n as i64),
        ramp: None,
    };
    let wave = inject(&base, &times, &recurring, 1.0).unwrap();
    assert!((mean(&wave) - mean(&base)).abs() < 3.0 / (n as f64).sqrt());
}

#[test]
fn null_ks_rejection_rate() {
    let mut rejections = 0;
    for seed in 0..100 {
        let mut cfg = SynthConfig::new(Scenario::Custom, seed);
        cfg.custom.variables = 1;
        let (split, _) = generate(&cfg).unwrap();
        let (r, c) = split.variable("x1").unwrap();
        if ks_two_sample(r, c).unwrap().drift_value < 0.05 {
            rejections += 1;
        }
    }
    assert!(rejections <= 9, "{rejections}/100");
}

#[test]
fn detection_is_deterministic() {
    let (split, truth) = generate(&SynthConfig::new(Scenario::Uc1Concept, 4)).unwrap();
    let cfg = DetectConfig::default();
    let a = detect(&split, &cfg, Some(&truth)).unwrap();
    let b = detect(&split, &cfg, Some(&truth)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.checksum(), b.checksum());
}
