//! The `run` subcommand: one trace file per optimizer plus a summary table.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use descentlab::core::csv::{format_f64, Table};
use descentlab::core::{init_normal, Prng};
use descentlab::error::Error;
use descentlab::optimizers::{train_from, write_trace_csv, TraceRecord, TrainConfig};

use crate::spec::{build_problem, RunSpec, STREAM_INIT, STREAM_RUN_BASE};
use crate::CliError;

pub struct SummaryRow {
    pub run_id: String,
    pub optimizer: String,
    pub final_loss: f64,
    /// First iteration with loss at or below the spec's target, NaN if the
    /// target was never reached or none was configured.
    pub iters_to_target: f64,
    pub wall_ms: f64,
}

pub const SUMMARY_HEADERS: [&str; 5] =
    ["run_id", "optimizer", "final_loss", "iters_to_target", "wall_ms"];

pub fn summary_table(rows: &[SummaryRow]) -> Table {
    let mut table = Table::new(SUMMARY_HEADERS.iter().map(|s| (*s).to_owned()).collect());
    for r in rows {
        table.push_row(vec![
            r.run_id.clone(),
            r.optimizer.clone(),
            format_f64(r.final_loss),
            format_f64(r.iters_to_target),
            format_f64(r.wall_ms),
        ]);
    }
    table
}

fn iterations_to_target(trace: &[TraceRecord], target: Option<f64>) -> f64 {
    match target {
        None => f64::NAN,
        Some(t) => trace
            .iter()
            .find(|r| r.loss <= t)
            .map_or(f64::NAN, |r| r.iteration as f64),
    }
}

/// Runs every configured optimizer from one shared initialization and writes
/// `<run_id>.csv` traces plus `summary.csv` into `out_dir`.
///
/// A numeric failure still writes the partial trace, then surfaces the run
/// id through [`CliError::Numeric`].
pub fn cmd_run(spec: &RunSpec, out_dir: &Path, workers: usize) -> Result<Vec<SummaryRow>, CliError> {
    if spec.optimizers.is_empty() {
        return Err(CliError::Spec("spec lists no optimizers".into()));
    }
    spec.stop.validate().map_err(CliError::spec)?;
    for cfg in &spec.optimizers {
        cfg.validate().map_err(CliError::spec)?;
    }
    let problem = build_problem(spec).map_err(CliError::spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Spec(e.to_string()))?;

    let master = Prng::new(spec.seed);
    // One shared starting point keeps the comparison honest.
    let theta0 = init_normal(
        problem.objective.dim(),
        spec.init_sigma,
        &mut master.derive(STREAM_INIT),
    )
    .map_err(CliError::spec)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Spec(format!("worker pool: {e}")))?;

    let results: Vec<Result<SummaryRow, (String, Error)>> = pool.install(|| {
        spec.optimizers
            .par_iter()
            .enumerate()
            .map(|(idx, opt)| {
                let run_id = format!("{:02}_{}_s{}", idx, opt.kind, spec.seed);
                let started = Instant::now();
                let mut cfg = TrainConfig::new(opt.clone(), spec.stop, run_id.clone());
                cfg.batch_size = spec.batch_size;
                let mut rng = master.derive(STREAM_RUN_BASE + idx as u64);
                let mut trace = Vec::new();
                let outcome = train_from(
                    problem.objective.as_ref(),
                    problem.data.as_ref(),
                    theta0.clone(),
                    &cfg,
                    &mut rng,
                    &mut trace,
                );
                let trace_path = out_dir.join(format!("{run_id}.csv"));
                if let Err(e) = write_trace_csv(&trace_path, &trace) {
                    return Err((run_id, e));
                }
                match outcome {
                    Ok(_) => Ok(SummaryRow {
                        run_id,
                        optimizer: opt.kind.to_string(),
                        final_loss: trace.last().map_or(f64::NAN, |r| r.loss),
                        iters_to_target: iterations_to_target(&trace, spec.target_loss),
                        wall_ms: started.elapsed().as_secs_f64() * 1e3,
                    }),
                    Err(e) => Err((run_id, e)),
                }
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    for result in results {
        match result {
            Ok(row) => rows.push(row),
            Err((run_id, source)) => return Err(CliError::Numeric { run_id, source }),
        }
    }
    summary_table(&rows)
        .save(out_dir.join("summary.csv"))
        .map_err(CliError::spec)?;
    Ok(rows)
}
