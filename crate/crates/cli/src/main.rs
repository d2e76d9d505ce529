//! `cefoliator` — batch front-end for the constant-expansion surface
//! solver. See the repository README for the config schema, artifact
//! layout and exit codes.

mod artifacts;
mod config;
mod tasks;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use cefoliator_core::CoreError;
use clap::{Parser, ValueEnum};

/// Run failure, partitioned by exit code: configuration problems (2),
/// solver failures (3), I/O failures (4).
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Solver(CoreError),
    Io(anyhow::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config: {msg}"),
            RunError::Solver(e) => write!(f, "solver: {e}"),
            RunError::Io(e) => write!(f, "i/o: {e:#}"),
        }
    }
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            // Bad values reaching the library from the config, and
            // malformed input files, are configuration problems.
            CoreError::InvalidArgument(_)
            | CoreError::GridMismatch(_)
            | CoreError::ParseError { .. } => RunError::Config(e.to_string()),
            CoreError::Io(io) => RunError::Io(anyhow::Error::new(io)),
            other => RunError::Solver(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskName {
    Solve,
    Foliate,
    Spectrum,
    Audit,
    Adm,
    Evolve,
    Unique,
}

impl TaskName {
    fn as_str(self) -> &'static str {
        match self {
            TaskName::Solve => "solve",
            TaskName::Foliate => "foliate",
            TaskName::Spectrum => "spectrum",
            TaskName::Audit => "audit",
            TaskName::Adm => "adm",
            TaskName::Evolve => "evolve",
            TaskName::Unique => "unique",
        }
    }
}

/// Constructs constant-expansion and constant-mean-curvature surfaces
/// in asymptotically flat initial data and reports their diagnostics.
#[derive(Parser)]
#[command(name = "cefoliator", version)]
struct Cli {
    /// Task to run; must match the task section of the config file.
    #[arg(value_enum)]
    task: TaskName,

    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides the config's `output` entry.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (falls back to CEFOLIATOR_THREADS, then 1).
    /// Accepted for forward compatibility; the current numerical
    /// kernels are single-threaded.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, RunError> {
    let threads = match flag {
        Some(n) => n,
        None => match std::env::var("CEFOLIATOR_THREADS") {
            Ok(s) => s.parse::<usize>().map_err(|_| {
                RunError::Config(format!(
                    "CEFOLIATOR_THREADS must be a positive integer, got {s:?}"
                ))
            })?,
            Err(_) => 1,
        },
    };
    if threads == 0 {
        return Err(RunError::Config("thread count must be at least 1".into()));
    }
    Ok(threads)
}

fn real_main(cli: &Cli) -> Result<String, RunError> {
    let threads = resolve_threads(cli.threads)?;
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))
        .map_err(RunError::Io)?;
    let cfg = config::parse_config(&text)?;
    let config_dir = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| {
            RunError::Config("no output directory: set `output` in the config or pass --out".into())
        })?;
    tasks::run(cli.task.as_str(), &cfg, &config_dir, &out_dir, threads)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
