//! descentlab: configure optimizers and objectives, run matched-budget
//! comparisons, and emit reproducible convergence traces.
//!
//! Exit codes: 0 success, 1 verify mismatch, 2 invalid spec, 3 numeric
//! failure during a run.

mod gadam_cmd;
mod runner;
mod spec;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use descentlab::core::csv::format_f64;
use descentlab::error::Error;

/// Errors with a documented exit code.
pub enum CliError {
    /// Unusable spec or environment: exit 2.
    Spec(String),
    /// A run hit non-finite numbers: exit 3.
    Numeric { run_id: String, source: Error },
}

impl CliError {
    fn spec(e: Error) -> Self {
        CliError::Spec(e.to_string())
    }

    fn report_and_code(self) -> u8 {
        match self {
            CliError::Spec(msg) => {
                eprintln!("error: {msg}");
                2
            }
            CliError::Numeric { run_id, source } => {
                eprintln!("numeric failure in run {run_id}: {source}");
                3
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "descentlab",
    version,
    about = "Gradient-descent bake-off harness with a genetic-Adam hybrid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run specification.
    spec: PathBuf,
    /// Output directory (overrides the spec's out_dir and DESCENTLAB_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results are identical for any value).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every optimizer in the spec from a shared start; write one trace
    /// CSV per optimizer and a summary CSV.
    Run(RunArgs),
    /// Run Gadam plus a matched-budget single-Adam baseline; write traces,
    /// generation reports (JSONL), and print a comparison line.
    Gadam(RunArgs),
    /// Recompute the built-in golden losses and the momentum unrolling
    /// identity; print a pass/fail table.
    Verify,
}

fn load(args: &RunArgs) -> Result<spec::RunSpec, CliError> {
    let mut run_spec = spec::load_spec(&args.spec).map_err(CliError::Spec)?;
    if let Some(seed) = args.seed {
        run_spec.seed = seed;
    }
    Ok(run_spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => {
            let result = load(&args).and_then(|run_spec| {
                let out_dir = spec::resolve_out_dir(args.out.as_deref(), &run_spec);
                runner::cmd_run(&run_spec, &out_dir, args.workers.unwrap_or(1)).map(|rows| {
                    for row in &rows {
                        println!(
                            "{}: final_loss={} iters_to_target={}",
                            row.run_id,
                            format_f64(row.final_loss),
                            format_f64(row.iters_to_target)
                        );
                    }
                    println!("wrote {} trace files + summary.csv to {}", rows.len(), out_dir.display());
                })
            });
            match result {
                Ok(()) => 0,
                Err(e) => e.report_and_code(),
            }
        }
        Command::Gadam(args) => {
            let result = load(&args).and_then(|run_spec| {
                let out_dir = spec::resolve_out_dir(args.out.as_deref(), &run_spec);
                gadam_cmd::cmd_gadam(&run_spec, &out_dir, args.workers).map(|s| {
                    println!(
                        "gadam_best={} adam_final={} comm_entries={} train_steps={} generations={}",
                        format_f64(s.gadam_best_loss),
                        format_f64(s.adam_final_loss),
                        s.comm_entries,
                        s.train_steps,
                        s.generations
                    );
                })
            });
            match result {
                Ok(()) => 0,
                Err(e) => e.report_and_code(),
            }
        }
        Command::Verify => verify::cmd_verify() as u8,
    };
    ExitCode::from(code)
}
