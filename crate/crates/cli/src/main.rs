use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftbench_core::bench::alloc::TrackingAllocator;

mod commands;
mod config;

use config::{MethodList, RunConfig};

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

/// Univariate drift detection and benchmarking.
#[derive(Parser, Debug)]
#[command(name = "driftbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run drift detection; exit 3 when the dataset alarm fires.
    Detect(Common),
    /// Write a synthetic dataset with its ground truth.
    Generate(Common),
    /// Time repeated detections and write a results CSV.
    Benchmark(Common),
    /// Turn a drift report into plot data.
    Report(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method ids or "all".
    #[arg(long)]
    methods: Option<String>,
    /// count:N, size:N or time:PERIOD.
    #[arg(long)]
    chunks: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if let Some(m) = &self.methods {
            cfg.methods = Some(MethodList::One(m.clone()));
        }
        if let Some(c) = &self.chunks {
            cfg.chunks = Some(c.clone());
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Detect(c) => {
            let report = commands::cmd_detect(&c.load()?, c.out.as_deref())?;
            Ok(if report.alarm { 3 } else { 0 })
        }
        Command::Generate(c) => commands::cmd_generate(&c.load()?, c.out.as_deref()).map(|_| 0),
        Command::Benchmark(c) => commands::cmd_benchmark(&c.load()?, c.out.as_deref()).map(|_| 0),
        Command::Report(c) => commands::cmd_report(&c.load()?, c.out.as_deref()).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message().replace('\n', " "));
            ExitCode::from(e.code())
        }
    }
}
