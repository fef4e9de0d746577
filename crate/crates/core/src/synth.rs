//! Seeded synthetic scenarios with known drift, written in the same CSV
//! layout the loader reads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::chunking::{make_chunks, ChunkSpec, Period};
use crate::dataset::{
    split, Dtype, ReferenceCurrentSplit, Role, Schema, TimeSeriesDataset, Timestamp, VariableColumn,
};
use crate::decision::{GroundTruthDriftSpec, ShiftKind};
use crate::error::{Error, Result};

const DAY: i64 = 86_400;
/// 2021-03-30T00:00:00Z
pub const UC1_START: Timestamp = 1_617_062_400;
pub const UC1_ROWS: usize = 46_555;
pub const UC1_INTERVAL: i64 = 180;
pub const UC1_REFERENCE_DAYS: i64 = 40;
/// 2019-04-01T00:00:00Z
pub const UC2_START: Timestamp = 1_554_076_800;
pub const UC2_ROWS: usize = 26_304;
pub const UC2_REFERENCE_DAYS: i64 = 366;
/// 2021-01-01T00:00:00Z
pub const CUSTOM_START: Timestamp = 1_609_459_200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Uc1Concept,
    Uc2Dataset,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionKind {
    Abrupt,
    Incremental,
    Recurring,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Onset {
    /// Fraction of the series (or of the current window inside `generate`).
    Fraction(f64),
    Timestamp(Timestamp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftInjection {
    pub kind: InjectionKind,
    pub target_variable: String,
    /// In units of the reference standard deviation.
    pub magnitude: f64,
    pub onset: Onset,
    /// Seconds; recurring only.
    #[serde(default)]
    pub period: Option<i64>,
    /// Seconds; incremental only.
    #[serde(default)]
    pub ramp: Option<i64>,
}

impl DriftInjection {
    pub fn abrupt(variable: &str, magnitude: f64, onset: Onset) -> Self {
        Self {
            kind: InjectionKind::Abrupt,
            target_variable: variable.to_string(),
            magnitude,
            onset,
            period: None,
            ramp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Uc1Params {
    /// Post-split temperature mean shift in reference-σ units.
    pub temperature_shift: f64,
    /// Post-split widening of co2 deviations around the reference mean.
    pub co2_spread: f64,
    /// ISO week (e.g. `2021-W23`) in which prediction confidence degrades.
    pub degrade_week: Option<String>,
    /// Drop the rows from Apr 30 up to the split, leaving a gap.
    pub gap: bool,
}

impl Default for Uc1Params {
    fn default() -> Self {
        Self {
            temperature_shift: 1.5,
            co2_spread: 1.0,
            degrade_week: Some("2021-W23".into()),
            gap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Uc2Params {
    /// Post-split downward temperature shift in reference-σ units.
    pub temperature_shift: f64,
    pub consumption_scale: f64,
}

impl Default for Uc2Params {
    fn default() -> Self {
        Self {
            temperature_shift: 0.75,
            consumption_scale: 1.29,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CustomParams {
    pub variables: usize,
    pub split_fraction: f64,
}

impl Default for CustomParams {
    fn default() -> Self {
        Self {
            variables: 3,
            split_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub scenario: Scenario,
    /// Defaults per scenario when absent.
    pub rows: Option<usize>,
    /// Seconds between rows; defaults per scenario when absent.
    pub sample_interval: Option<i64>,
    pub injections: Vec<DriftInjection>,
    pub uc1: Uc1Params,
    pub uc2: Uc2Params,
    pub custom: CustomParams,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenario: Scenario::Uc1Concept,
            rows: None,
            sample_interval: None,
            injections: Vec::new(),
            uc1: Uc1Params::default(),
            uc2: Uc2Params::default(),
            custom: CustomParams::default(),
        }
    }
}

impl SynthConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            ..Self::default()
        }
    }
}

/// A generated dataset before splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: TimeSeriesDataset,
    pub split_timestamp: Timestamp,
    pub truth: GroundTruthDriftSpec,
}

impl Generated {
    pub fn split(&self) -> Result<ReferenceCurrentSplit> {
        split(&self.dataset, self.split_timestamp)
    }

    /// Schema describing the generated columns (time column named `time`).
    pub fn schema(&self) -> Schema {
        self.dataset
            .columns
            .iter()
            .fold(Schema::new().with("time", Role::TimeIndex, Dtype::Numeric), |s, c| {
                s.with(&c.name, c.role, c.dtype)
            })
    }
}

fn pop_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
}

fn hour_of_day(t: Timestamp) -> f64 {
    t.rem_euclid(DAY) as f64 / 3600.0
}

fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, stationary_sd: f64) -> Vec<f64> {
    let innov = Normal::new(0.0, stationary_sd * (1.0 - phi * phi).sqrt()).expect("valid sd");
    let mut out = Vec::with_capacity(n);
    let mut x = Normal::new(0.0, stationary_sd).expect("valid sd").sample(rng);
    for _ in 0..n {
        out.push(x);
        x = phi * x + innov.sample(rng);
    }
    out
}

/// Add a drift pattern to `series` from the onset on. `times` gives each
/// row's timestamp; the shift is `magnitude · sigma_ref`.
pub fn inject(
    series: &[f64],
    times: &[Timestamp],
    inj: &DriftInjection,
    sigma_ref: f64,
) -> Result<Vec<f64>> {
    if series.len() != times.len() || series.is_empty() {
        return Err(Error::InvalidArgument("series and times must be non-empty and aligned".into()));
    }
    if inj.magnitude.is_nan() || inj.magnitude < 0.0 {
        return Err(Error::InvalidArgument("injection magnitude must be non-negative".into()));
    }
    let onset_idx = match inj.onset {
        Onset::Fraction(f) => {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidArgument(format!("onset fraction {f} outside [0, 1)")));
            }
            (f * series.len() as f64).round() as usize
        }
        Onset::Timestamp(t) => times.partition_point(|&x| x < t),
    };
    if onset_idx >= series.len() {
        return Err(Error::InvalidArgument("onset lies after the series".into()));
    }
    let t0 = times[onset_idx];
    let amp = inj.magnitude * sigma_ref;
    let shape: Box<dyn Fn(Timestamp) -> f64> = match inj.kind {
        InjectionKind::Abrupt => Box::new(|_| 1.0),
        InjectionKind::Incremental => {
            let ramp = inj
                .ramp
                .filter(|r| *r > 0)
                .ok_or_else(|| Error::InvalidArgument("incremental drift needs a positive ramp".into()))?
                as f64;
            Box::new(move |t| ((t - t0) as f64 / ramp).min(1.0))
        }
        InjectionKind::Recurring => {
            let period = inj
                .period
                .filter(|p| *p > 0)
                .ok_or_else(|| Error::InvalidArgument("recurring drift needs a positive period".into()))?
                as f64;
            Box::new(move |t| (2.0 * PI * (t - t0) as f64 / period).sin())
        }
    };
    Ok(series
        .iter()
        .zip(times)
        .enumerate()
        .map(|(i, (v, t))| if i >= onset_idx { v + amp * shape(*t) } else { *v })
        .collect())
}

fn shift_kind_for(scenario: Scenario, truth: &[(String, bool)], target: Option<&str>) -> Option<ShiftKind> {
    let target_drift = truth.iter().any(|(k, v)| *v && Some(k.as_str()) == target);
    let input_drift = truth.iter().any(|(k, v)| *v && Some(k.as_str()) != target);
    match (input_drift, target_drift) {
        (true, true) => Some(ShiftKind::Dataset),
        (false, true) => Some(ShiftKind::PriorProbability),
        (true, false) if scenario == Scenario::Uc1Concept => Some(ShiftKind::Concept),
        (true, false) => Some(ShiftKind::Covariate),
        (false, false) => None,
    }
}

struct Draft {
    time: Vec<Timestamp>,
    columns: Vec<VariableColumn>,
    split_idx: usize,
    drifted: Vec<String>,
    target: Option<String>,
}

fn timeline(start: Timestamp, rows: usize, interval: i64) -> Vec<Timestamp> {
    (0..rows as i64).map(|i| start + i * interval).collect()
}

fn uc1(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Draft> {
    let rows = cfg.rows.unwrap_or(UC1_ROWS);
    let interval = cfg.sample_interval.unwrap_or(UC1_INTERVAL);
    let span = rows as i64 * interval;
    let default_days = UC1_REFERENCE_DAYS as f64 / (UC1_ROWS as f64 * UC1_INTERVAL as f64 / DAY as f64);
    let days = if cfg.rows.is_none() && cfg.sample_interval.is_none() {
        UC1_REFERENCE_DAYS
    } else {
        ((default_days * span as f64 / DAY as f64).round() as i64).max(1)
    };
    if span <= (days + 1) * DAY {
        return Err(Error::InvalidArgument(format!(
            "uc1 needs more than {} days of rows",
            days + 1
        )));
    }
    let time = timeline(UC1_START, rows, interval);
    let split_ts = UC1_START + days * DAY;
    let split_idx = time.partition_point(|&t| t < split_ts);

    let occ_prob = |h: f64| if (8.0..18.0).contains(&h) { 0.75 } else { 0.05 };
    let occupancy: Vec<f64> = time
        .iter()
        .map(|&t| f64::from(rng.random::<f64>() < occ_prob(hour_of_day(t))))
        .collect();
    let noise = Normal::new(0.0, 0.4).expect("valid sd");
    let mut temperature: Vec<f64> = time
        .iter()
        .zip(&occupancy)
        .map(|(&t, o)| {
            21.0 + 1.2 * (2.0 * PI * (hour_of_day(t) - 9.0) / 24.0).sin() + 0.3 * o + noise.sample(rng)
        })
        .collect();
    let resid = ar1(rng, rows, 0.8, 25.0);
    let mut co2: Vec<f64> = occupancy.iter().zip(&resid).map(|(o, e)| 420.0 + 380.0 * o + e).collect();

    let p = &cfg.uc1;
    let mut drifted = Vec::new();
    if p.temperature_shift > 0.0 {
        let shift = p.temperature_shift * pop_std(&temperature[..split_idx]);
        temperature[split_idx..].iter_mut().for_each(|v| *v += shift);
        drifted.push("temperature".to_string());
    }
    if p.co2_spread > 0.0 {
        let ref_mean = co2[..split_idx].iter().sum::<f64>() / split_idx as f64;
        co2[split_idx..]
            .iter_mut()
            .for_each(|v| *v = ref_mean + (*v - ref_mean) * (1.0 + p.co2_spread));
        drifted.push("co2".to_string());
    }

    let degrade = p.degrade_week.as_deref();
    let prediction: Vec<f64> = time
        .iter()
        .zip(&occupancy)
        .map(|(&t, &o)| {
            let degraded = degrade.is_some_and(|w| iso_week_label(t) == w);
            let e = if degraded {
                rng.random_range(0.1..0.35)
            } else {
                rng.random_range(0.0..0.02)
            };
            if o == 1.0 { 1.0 - e } else { e }
        })
        .collect();

    Ok(Draft {
        time,
        columns: vec![
            VariableColumn::new("co2", Role::Input, Dtype::Numeric, co2),
            VariableColumn::new("temperature", Role::Input, Dtype::Numeric, temperature),
            VariableColumn::new("occupancy", Role::Target, Dtype::Binary, occupancy),
            VariableColumn::new("prediction", Role::Prediction, Dtype::Numeric, prediction),
        ],
        split_idx,
        drifted,
        target: Some("occupancy".into()),
    })
}

fn iso_week_label(t: Timestamp) -> String {
    use chrono::Datelike;
    let w = crate::dataset::utc(t).iso_week();
    format!("{}-W{:02}", w.year(), w.week())
}

fn uc2(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Draft> {
    let rows = cfg.rows.unwrap_or(UC2_ROWS);
    let interval = cfg.sample_interval.unwrap_or(3600);
    let span = rows as i64 * interval;
    if span <= UC2_REFERENCE_DAYS * DAY + DAY {
        return Err(Error::InvalidArgument(
            "uc2 needs more than one full year of rows to cover the annual cycle".into(),
        ));
    }
    let time = timeline(UC2_START, rows, interval);
    let split_idx = time.partition_point(|&t| t < UC2_START + UC2_REFERENCE_DAYS * DAY);

    let noise = Normal::new(0.0, 2.0).expect("valid sd");
    let latent: Vec<f64> = time
        .iter()
        .map(|&t| {
            let day = (t - UC2_START) as f64 / DAY as f64;
            // coldest in mid-January, ~290 days after April 1
            6.24 + 11.0 * (2.0 * PI * (day - 200.0) / 365.25).sin()
                + 3.0 * (2.0 * PI * (hour_of_day(t) - 9.0) / 24.0).sin()
                + noise.sample(rng)
        })
        .collect();
    let resid = ar1(rng, rows, 0.8, 5.0);
    let mut consumption: Vec<f64> = time
        .iter()
        .zip(&latent)
        .zip(&resid)
        .map(|((&t, temp), e)| {
            20.0 + 6.0 * (17.0 - temp).max(0.0)
                + 8.0 * (2.0 * PI * (hour_of_day(t) - 7.0) / 24.0).sin()
                + e
        })
        .collect();
    let mut temp_outside = latent;

    let p = &cfg.uc2;
    let mut drifted = Vec::new();
    if p.temperature_shift > 0.0 {
        let shift = p.temperature_shift * pop_std(&temp_outside[..split_idx]);
        temp_outside[split_idx..].iter_mut().for_each(|v| *v -= shift);
        drifted.push("temp_outside".to_string());
    }
    if p.consumption_scale != 1.0 {
        if p.consumption_scale.is_nan() || p.consumption_scale <= 0.0 {
            return Err(Error::InvalidArgument("consumption scale must be positive".into()));
        }
        consumption[split_idx..].iter_mut().for_each(|v| *v *= p.consumption_scale);
        drifted.push("consumption".to_string());
    }
    Ok(Draft {
        time,
        columns: vec![
            VariableColumn::new("consumption", Role::Target, Dtype::Numeric, consumption),
            VariableColumn::new("temp_outside", Role::Input, Dtype::Numeric, temp_outside),
        ],
        split_idx,
        drifted,
        target: Some("consumption".into()),
    })
}

fn custom(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Draft> {
    let rows = cfg.rows.unwrap_or(2_000);
    let interval = cfg.sample_interval.unwrap_or(3600);
    let p = &cfg.custom;
    if p.variables == 0 {
        return Err(Error::InvalidArgument("custom scenario needs at least one variable".into()));
    }
    if !(p.split_fraction > 0.0 && p.split_fraction < 1.0) {
        return Err(Error::InvalidArgument("split fraction must lie in (0, 1)".into()));
    }
    let split_idx = (rows as f64 * p.split_fraction).round() as usize;
    if split_idx == 0 || split_idx >= rows {
        return Err(Error::InvalidArgument("too few rows for the requested split".into()));
    }
    let time = timeline(CUSTOM_START, rows, interval);
    let std_normal = Normal::new(0.0, 1.0).expect("valid sd");
    let columns = (1..=p.variables)
        .map(|k| {
            let values = (0..rows).map(|_| std_normal.sample(rng)).collect();
            VariableColumn::new(format!("x{k}"), Role::Input, Dtype::Numeric, values)
        })
        .collect();
    Ok(Draft {
        time,
        columns,
        split_idx,
        drifted: Vec::new(),
        target: None,
    })
}

/// Build the full dataset, its split point and the ground truth.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<Generated> {
    if cfg.rows == Some(0) {
        return Err(Error::InvalidArgument("rows must be positive".into()));
    }
    if cfg.sample_interval.is_some_and(|s| s <= 0) {
        return Err(Error::InvalidArgument("sample interval must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draft = match cfg.scenario {
        Scenario::Uc1Concept => uc1(cfg, &mut rng)?,
        Scenario::Uc2Dataset => uc2(cfg, &mut rng)?,
        Scenario::Custom => custom(cfg, &mut rng)?,
    };
    let s = draft.split_idx;
    for inj in &cfg.injections {
        let col = draft
            .columns
            .iter_mut()
            .find(|c| c.name == inj.target_variable)
            .ok_or_else(|| Error::ColumnNotFound(inj.target_variable.clone()))?;
        if col.dtype == Dtype::Binary {
            return Err(Error::InvalidArgument(format!(
                "cannot inject drift into binary column {}",
                col.name
            )));
        }
        let sigma = pop_std(&col.values[..s]);
        let shifted = inject(&col.values[s..], &draft.time[s..], inj, sigma)?;
        col.values[s..].copy_from_slice(&shifted);
        if inj.magnitude > 0.0 && !draft.drifted.contains(&col.name) {
            draft.drifted.push(col.name.clone());
        }
    }
    let split_timestamp = draft.time[s];
    let mut dataset = TimeSeriesDataset::new(format!("{:?}", cfg.scenario).to_lowercase(), draft.time, draft.columns)?;
    if cfg.scenario == Scenario::Uc1Concept && cfg.uc1.gap {
        // Apr 30 up to the split
        let gap_start = UC1_START + 31 * DAY;
        let keep: Vec<bool> = dataset.time.iter().map(|&t| t < gap_start || t >= split_timestamp).collect();
        dataset = dataset.filter_rows(&keep);
    }
    let flags: Vec<(String, bool)> = dataset
        .monitored_columns()
        .map(|c| (c.name.clone(), draft.drifted.contains(&c.name)))
        .collect();
    let shift_kind = shift_kind_for(cfg.scenario, &flags, draft.target.as_deref());
    let truth = GroundTruthDriftSpec::new(flags, draft.target.as_deref(), shift_kind)?;
    Ok(Generated {
        dataset,
        split_timestamp,
        truth,
    })
}

pub fn generate(cfg: &SynthConfig) -> Result<(ReferenceCurrentSplit, GroundTruthDriftSpec)> {
    let g = generate_dataset(cfg)?;
    Ok((g.split()?, g.truth))
}

/// Keys of the weekly chunks of the current window that overlap the
/// configured degradation week.
pub fn degraded_chunk_keys(split: &ReferenceCurrentSplit, week: &str) -> Result<Vec<String>> {
    Ok(make_chunks(&split.current, &ChunkSpec::TimePeriod { period: Period::Week })?
        .into_iter()
        .filter(|c| c.key == week)
        .map(|c| c.key)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uc1_default_shape() {
        let g = generate_dataset(&SynthConfig::new(Scenario::Uc1Concept, 1)).unwrap();
        assert_eq!(g.dataset.row_count(), UC1_ROWS);
        let s = g.split().unwrap();
        assert_eq!(s.reference.row_count(), 19_200);
        assert_eq!(g.split_timestamp, 1_620_518_400);
        let names: Vec<_> = g.dataset.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["co2", "temperature", "occupancy", "prediction"]);
        assert_eq!(g.truth.shift_kind, Some(ShiftKind::Concept));
    }

    #[test]
    fn uc2_truth_is_dataset_shift() {
        let (s, truth) = generate(&SynthConfig::new(Scenario::Uc2Dataset, 1)).unwrap();
        assert_eq!(s.reference.row_count(), 8_784);
        assert_eq!(truth.shift_kind, Some(ShiftKind::Dataset));
        let mut short = SynthConfig::new(Scenario::Uc2Dataset, 1);
        short.rows = Some(5_000);
        assert!(generate(&short).is_err());
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::new(Scenario::Uc1Concept, 9);
        assert_eq!(generate_dataset(&cfg).unwrap(), generate_dataset(&cfg).unwrap());
    }

    #[test]
    fn zero_magnitude_is_identity() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let t: Vec<i64> = (0..50).collect();
        let inj = DriftInjection::abrupt("x", 0.0, Onset::Fraction(0.5));
        assert_eq!(inject(&x, &t, &inj, 2.0).unwrap(), x);
    }

    #[test]
    fn abrupt_step_from_onset() {
        let x = vec![0.0; 10];
        let t: Vec<i64> = (0..10).collect();
        let inj = DriftInjection::abrupt("x", 2.0, Onset::Timestamp(6));
        let y = inject(&x, &t, &inj, 0.5).unwrap();
        assert_eq!(&y[..6], &[0.0; 6]);
        assert_eq!(&y[6..], &[1.0; 4]);
    }

    #[test]
    fn injections_mark_truth() {
        let mut cfg = SynthConfig::new(Scenario::Custom, 2);
        cfg.injections.push(DriftInjection::abrupt("x2", 1.0, Onset::Fraction(0.8)));
        let (_, truth) = generate(&cfg).unwrap();
        assert!(truth.flags["x2"]);
        assert!(!truth.flags["x1"]);
        assert_eq!(truth.shift_kind, Some(ShiftKind::Covariate));
        cfg.injections[0].target_variable = "nope".into();
        assert!(generate(&cfg).is_err());
    }
}
