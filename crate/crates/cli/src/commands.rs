use std::io::Write;
use std::path::{Path, PathBuf};

use driftbench_core::bench::{aggregate, format_summary, run_benchmark, write_results_csv, BenchmarkPlan};
use driftbench_core::dataset::{clean, load_csv, split, write_csv, ReferenceCurrentSplit};
use driftbench_core::decision::GroundTruthDriftSpec;
use driftbench_core::par::Parallelism;
use driftbench_core::pipeline::{detect, DriftReport};
use driftbench_core::report::{plot_bundle, to_sorted_json};
use driftbench_core::synth::generate_dataset;
use driftbench_core::Error;

use crate::config::{missing, RunConfig};
use crate::CliError;

fn data_err(e: Error) -> CliError {
    match e {
        Error::InvalidArgument(_) | Error::IncompatibleThreshold { .. } => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}")))
        }
    }
}

fn output_path(cfg: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(|p| cfg.resolve(p)))
}

fn load_split(cfg: &RunConfig) -> Result<ReferenceCurrentSplit, CliError> {
    let dataset = cfg.resolve(cfg.require(&cfg.dataset, "dataset")?);
    let schema = cfg.require(&cfg.schema, "schema")?;
    let at = *cfg.require(&cfg.split_timestamp, "split_timestamp")?;
    let raw = load_csv(&dataset, schema, &cfg.time_format()).map_err(data_err)?;
    let ds = clean(&raw, cfg.clean.unwrap_or_default()).map_err(data_err)?;
    split(&ds, at).map_err(data_err)
}

fn load_truth(cfg: &RunConfig) -> Result<Option<GroundTruthDriftSpec>, CliError> {
    let Some(p) = &cfg.truth else { return Ok(None) };
    let p = cfg.resolve(p);
    let text = std::fs::read_to_string(&p)
        .map_err(|e| CliError::Data(format!("cannot read truth {}: {e}", p.display())))?;
    let truth: GroundTruthDriftSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("invalid truth {}: {e}", p.display())))?;
    truth.validate().map_err(data_err)?;
    Ok(Some(truth))
}

/// Returns the report; the caller maps `alarm` to the exit code.
pub fn cmd_detect(cfg: &RunConfig, out: Option<&Path>) -> Result<DriftReport, CliError> {
    let detect_cfg = cfg.detect_config()?;
    let split = load_split(cfg)?;
    let truth = load_truth(cfg)?;
    let mut report = detect(&split, &detect_cfg, truth.as_ref()).map_err(data_err)?;
    if let Some(p) = &cfg.dataset {
        report.dataset = p.display().to_string();
    }
    let json = to_sorted_json(&report).map_err(data_err)?;
    emit(&json, output_path(cfg, out).as_deref())?;
    Ok(report)
}

/// Writes the CSV, `<stem>.truth.json` and a ready-to-run `<stem>.detect.json`.
pub fn cmd_generate(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let mut synth = cfg.require(&cfg.synth, "synth")?.clone();
    if let Some(seed) = cfg.seed {
        synth.seed = seed;
    }
    let csv_path = output_path(cfg, out).ok_or_else(|| missing("output"))?;
    let generated = generate_dataset(&synth).map_err(data_err)?;
    let format = cfg.time_format();
    write_csv(&generated.dataset, &csv_path, &format).map_err(data_err)?;

    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let dir = csv_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let truth_name = format!("{stem}.truth.json");
    let truth_json = to_sorted_json(&generated.truth).map_err(data_err)?;
    emit(&truth_json, Some(&dir.join(&truth_name)))?;

    let detect = RunConfig {
        dataset: csv_path.file_name().map(PathBuf::from),
        schema: Some(generated.schema()),
        time_format: Some(format),
        split_timestamp: Some(generated.split_timestamp),
        truth: Some(PathBuf::from(truth_name)),
        seed: Some(synth.seed),
        ..RunConfig::default()
    };
    let detect_json = serde_json::to_value(&detect)
        .map(|mut v| {
            if let Some(obj) = v.as_object_mut() {
                obj.retain(|_, val| !val.is_null() && val != &serde_json::json!({}));
            }
            v
        })
        .map_err(|e| CliError::Data(e.to_string()))?;
    let detect_text = to_sorted_json(&detect_json).map_err(data_err)?;
    emit(&detect_text, Some(&dir.join(format!("{stem}.detect.json"))))?;
    Ok(csv_path)
}

pub fn cmd_benchmark(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let mut detect_cfg = cfg.detect_config()?;
    detect_cfg.parallelism = Parallelism::Sequential;
    let split = match (&cfg.dataset, &cfg.synth) {
        (Some(_), _) => load_split(cfg)?,
        (None, Some(synth)) => {
            let mut synth = synth.clone();
            if let Some(seed) = cfg.seed {
                synth.seed = seed;
            }
            generate_dataset(&synth).and_then(|g| g.split()).map_err(data_err)?
        }
        (None, None) => return Err(missing("dataset")),
    };
    let section = cfg.benchmark.clone().unwrap_or_default();
    let mut plan = BenchmarkPlan::new(section.run_id.clone().unwrap_or_else(|| "run".into()), detect_cfg);
    if let Some(r) = section.repetitions {
        plan.repetitions = r;
    }
    if let Some(mode) = section.report {
        plan.report = mode;
    }
    let outcome = run_benchmark(&plan, &split).map_err(data_err)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let csv_path = output_path(cfg, out).ok_or_else(|| missing("output"))?;
    write_results_csv(&outcome.records, &csv_path, section.append).map_err(data_err)?;
    let table = format_summary(&aggregate(&outcome.records).map_err(data_err)?);
    emit(&table, None)?;
    Ok(table)
}

pub fn cmd_report(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let p = cfg.resolve(cfg.require(&cfg.report, "report")?);
    let text = std::fs::read_to_string(&p)
        .map_err(|e| CliError::Data(format!("cannot read report {}: {e}", p.display())))?;
    let report: DriftReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("invalid drift report {}: {e}", p.display())))?;
    let bundle = plot_bundle(&report);
    let json = to_sorted_json(&bundle).map_err(data_err)?;
    emit(&json, output_path(cfg, out).as_deref())
}
