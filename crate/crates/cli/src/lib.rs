//! Configuration-driven experiment runner: validates a JSON config, runs the
//! experiment on a fixed-size job pool and writes report rows as JSONL and
//! CSV.

pub mod config;
pub mod experiments;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use meanfield_core::bounds::{write_jsonl, BoundReport};
use thiserror::Error;

pub use config::{Diagnostic, Experiment, ExperimentConfig, Params, Resolved};
pub use experiments::{run_experiment, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Usage(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] meanfield_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 when a grid
    /// exceeds the memory cap, 4 for any other runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(meanfield_core::Error::Resource(_)) => 3,
            _ => 4,
        }
    }
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<BoundReport>,
    pub guard: Option<String>,
    pub jsonl: PathBuf,
    pub csv: PathBuf,
    pub log: PathBuf,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.pass).count()
    }

    /// Nonzero iff any row failed or a numerical guard tripped.
    pub fn exit_code(&self) -> i32 {
        if self.failures() > 0 || self.guard.is_some() {
            1
        } else {
            0
        }
    }
}

/// Validates, runs and writes `<out>/<experiment>.{jsonl,csv,log}`.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let diagnostics = config.validate();
    if !diagnostics.is_empty() {
        return Err(CliError::Usage(diagnostics));
    }
    let resolved = config.resolve().map_err(|d| CliError::Usage(vec![d]))?;
    let out_dir = opts.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&out_dir)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| meanfield_core::Error::Resource(format!("cannot start job pool: {e}")))?;
    let started = Instant::now();
    let outcome = pool.install(|| run_experiment(&resolved))?;
    let elapsed = started.elapsed();

    let id = resolved.experiment.id();
    let jsonl = out_dir.join(format!("{id}.jsonl"));
    let csv = out_dir.join(format!("{id}.csv"));
    let log = out_dir.join(format!("{id}.log"));
    write_jsonl(&outcome.reports, BufWriter::new(File::create(&jsonl)?))?;
    write_csv(&outcome.reports, &csv)?;

    let summary = RunSummary { reports: outcome.reports, guard: outcome.guard, jsonl, csv, log };
    // wall-clock data stays out of the JSONL so that reruns are byte-identical
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut w = BufWriter::new(File::create(&summary.log)?);
    writeln!(w, "experiment={id} seed={} finished_unix={stamp} elapsed_s={:.3}", resolved.seed, elapsed.as_secs_f64())?;
    writeln!(w, "rows={} failed={}", summary.reports.len(), summary.failures())?;
    if let Some(g) = &summary.guard {
        writeln!(w, "guard tripped: {g}")?;
    }
    w.flush()?;
    Ok(summary)
}

/// Columns `inequality_id, t, lhs, rhs, margin`.
pub fn write_csv(reports: &[BoundReport], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| meanfield_core::Error::Format(e.to_string()))?;
    let err = |e: csv::Error| CliError::Core(meanfield_core::Error::Format(e.to_string()));
    w.write_record(["inequality_id", "t", "lhs", "rhs", "margin"]).map_err(err)?;
    for r in reports {
        w.write_record([
            r.inequality_id.clone(),
            r.time.to_string(),
            r.lhs_measured.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
