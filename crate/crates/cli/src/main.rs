use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meanfield_cli::{run, CliError, ExperimentConfig, RunOptions};

/// Mean-field bound verification experiments.
#[derive(Parser)]
#[command(name = "meanfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (default: the config's `output`, else ./results).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write JSONL/CSV results.
    Run { config: PathBuf },
    /// Check a config and print diagnostics, one per line.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Err(d) => {
                eprintln!("{d}");
                2
            }
            Ok(c) => {
                let mut c = c;
                if let Some(s) = cli.seed {
                    c.seed = s;
                }
                let diagnostics = c.validate();
                for d in &diagnostics {
                    println!("{d}");
                }
                if diagnostics.is_empty() {
                    0
                } else {
                    2
                }
            }
        },
        Command::Run { config } => {
            let opts = RunOptions { seed: cli.seed, jobs: cli.jobs, out: cli.out };
            match ExperimentConfig::load(&config).map_err(|d| CliError::Usage(vec![d])).and_then(|c| run(&c, &opts)) {
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                Ok(summary) => {
                    for r in summary.reports.iter().filter(|r| !r.pass) {
                        eprintln!("FAIL {} t={} lhs={:.6e} rhs={:.6e}", r.inequality_id, r.time, r.lhs_measured, r.rhs);
                    }
                    if let Some(g) = &summary.guard {
                        eprintln!("guard tripped: {g}");
                    }
                    println!(
                        "{} rows, {} failed; results in {}",
                        summary.reports.len(),
                        summary.failures(),
                        summary.jsonl.display()
                    );
                    summary.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
