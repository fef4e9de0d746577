use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use driftbench_core::bench::ReportMode;
use driftbench_core::chunking::ChunkSpec;
use driftbench_core::dataset::{CleanPolicy, Schema, TimeFormat, Timestamp};
use driftbench_core::decision::{ThresholdSpec, DEFAULT_CBPE_THRESHOLD, DEFAULT_SHARE_THRESHOLD};
use driftbench_core::methods::{parse_method_list, MethodId, MethodParams};
use driftbench_core::pipeline::{DetectConfig, KS_EXACT_CUTOFF};
use driftbench_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodList {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub repetitions: Option<usize>,
    pub report: Option<ReportMode>,
    pub run_id: Option<String>,
    pub append: bool,
}

/// One JSON document driving any subcommand. Relative paths resolve against
/// the config file's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub schema: Option<Schema>,
    pub time_format: Option<TimeFormat>,
    pub split_timestamp: Option<Timestamp>,
    pub clean: Option<CleanPolicy>,
    pub truth: Option<PathBuf>,
    pub methods: Option<MethodList>,
    pub thresholds: BTreeMap<MethodId, ThresholdSpec>,
    pub chunks: Option<String>,
    pub weights: BTreeMap<String, f64>,
    pub share_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub params: Option<MethodParams>,
    pub ks_exact_cutoff: Option<usize>,
    pub cbpe_threshold: Option<f64>,
    pub output: Option<PathBuf>,
    pub synth: Option<SynthConfig>,
    pub benchmark: Option<BenchmarkSection>,
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing config key: {key}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| missing(key))
    }

    pub fn time_format(&self) -> TimeFormat {
        self.time_format.clone().unwrap_or_default()
    }

    pub fn method_ids(&self) -> Result<Vec<MethodId>, CliError> {
        let spec = match &self.methods {
            None => return Ok(driftbench_core::methods::table_methods()),
            Some(MethodList::One(s)) => s.clone(),
            Some(MethodList::Many(v)) => v.join(","),
        };
        parse_method_list(&spec).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn chunk_spec(&self) -> Result<Option<ChunkSpec>, CliError> {
        self.chunks
            .as_deref()
            .map(|s| s.parse().map_err(|e: driftbench_core::Error| CliError::Usage(e.to_string())))
            .transpose()
    }

    pub fn detect_config(&self) -> Result<DetectConfig, CliError> {
        let cfg = DetectConfig {
            methods: self.method_ids()?,
            params: self.params.clone().unwrap_or_default(),
            thresholds: self.thresholds.clone(),
            chunks: self.chunk_spec()?,
            weights: self.weights.clone(),
            share_threshold: self.share_threshold.unwrap_or(DEFAULT_SHARE_THRESHOLD),
            seed: self.seed.unwrap_or(0),
            ks_exact_cutoff: self.ks_exact_cutoff.unwrap_or(KS_EXACT_CUTOFF),
            cbpe_threshold: self.cbpe_threshold.unwrap_or(DEFAULT_CBPE_THRESHOLD),
            ..DetectConfig::default()
        };
        for m in &cfg.methods {
            cfg.threshold_for(*m)
                .validate()
                .map_err(|e| CliError::Usage(format!("threshold for {m}: {e}")))?;
        }
        if !(0.0..=1.0).contains(&cfg.share_threshold) {
            return Err(CliError::Usage("share_threshold must lie in [0, 1]".into()));
        }
        Ok(cfg)
    }
}
