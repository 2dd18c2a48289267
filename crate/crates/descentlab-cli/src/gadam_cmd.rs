//! The `gadam` subcommand: the evolutionary run, its reports, and a
//! matched-budget single-Adam baseline.

use std::path::Path;
use std::time::Instant;

use descentlab::core::{init_normal, Prng};
use descentlab::gadam::{append_reports_jsonl, run_gadam, GenerationReport};
use descentlab::models::Batch;
use descentlab::optimizers::{train_from, write_trace_csv, StopRule, TraceRecord, TrainConfig};

use crate::spec::{build_problem, RunSpec, STREAM_BASELINE_INIT, STREAM_RUN_BASE};
use crate::CliError;

pub struct GadamSummary {
    pub gadam_best_loss: f64,
    pub adam_final_loss: f64,
    pub comm_entries: u64,
    pub train_steps: u64,
    pub generations: usize,
}

/// Runs Gadam and then plain Adam with exactly the same number of gradient
/// updates. Writes `gadam_generations.jsonl`, a per-generation
/// `gadam_trace.csv`, and the baseline's `adam_baseline.csv` into `out_dir`.
///
/// Both final losses are evaluated on the full objective (analytic value, or
/// mean loss over the whole dataset) so the comparison line is apples to
/// apples.
pub fn cmd_gadam(
    spec: &RunSpec,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<GadamSummary, CliError> {
    let mut cfg = spec
        .gadam
        .clone()
        .ok_or_else(|| CliError::Spec("spec has no gadam section".into()))?;
    if let Some(w) = workers {
        cfg.workers = w.max(1);
    }
    cfg.validate().map_err(CliError::spec)?;
    let problem = build_problem(spec).map_err(CliError::spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Spec(e.to_string()))?;

    let started = Instant::now();
    let mut reports: Vec<GenerationReport> = Vec::new();
    let outcome = run_gadam(
        &cfg,
        problem.objective.as_ref(),
        problem.data.as_ref(),
        spec.seed,
        &mut reports,
    );
    // Partial reports are still worth keeping on failure.
    append_reports_jsonl(out_dir.join("gadam_generations.jsonl"), &reports)
        .map_err(CliError::spec)?;
    let outcome = outcome.map_err(|e| CliError::Numeric {
        run_id: format!("gadam_s{}", spec.seed),
        source: e,
    })?;

    let gadam_trace: Vec<TraceRecord> = reports
        .iter()
        .map(|r| TraceRecord {
            run_id: format!("gadam_s{}", spec.seed),
            optimizer: "gadam".into(),
            epoch: r.generation as u64,
            iteration: r.generation as u64 + 1,
            batch_index: 0,
            loss: r.best_loss,
            grad_norm: f64::NAN,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
        .collect();
    write_trace_csv(out_dir.join("gadam_trace.csv"), &gadam_trace).map_err(CliError::spec)?;

    // Matched-budget baseline: same inner Adam config, same total number of
    // gradient updates, independent seeded start.
    let master = Prng::new(spec.seed);
    let baseline_id = format!("adam_baseline_s{}", spec.seed);
    let budget = outcome.train_steps.max(1);
    let mut train_cfg = TrainConfig::new(cfg.adam.clone(), StopRule::max_iters(budget), baseline_id.clone());
    train_cfg.batch_size = cfg.batch_size;
    let theta0 = init_normal(
        problem.objective.dim(),
        cfg.init_sigma,
        &mut master.derive(STREAM_BASELINE_INIT),
    )
    .map_err(CliError::spec)?;
    let mut rng = master.derive(STREAM_RUN_BASE);
    let mut trace = Vec::new();
    let baseline_theta = train_from(
        problem.objective.as_ref(),
        problem.data.as_ref(),
        theta0,
        &train_cfg,
        &mut rng,
        &mut trace,
    );
    write_trace_csv(out_dir.join(format!("{baseline_id}.csv")), &trace).map_err(CliError::spec)?;
    let baseline_theta = baseline_theta.map_err(|e| CliError::Numeric {
        run_id: baseline_id,
        source: e,
    })?;

    // Final comparison on the full objective.
    let full_loss = |theta: &descentlab::core::ParamVector| -> Result<f64, CliError> {
        let batch = match problem.data.as_ref() {
            None => Batch::None,
            Some(ds) => {
                return {
                    let idx: Vec<usize> = (0..ds.len()).collect();
                    problem
                        .objective
                        .loss_only(theta, Batch::Rows(ds, &idx))
                        .map_err(CliError::spec)
                }
            }
        };
        problem
            .objective
            .loss_only(theta, batch)
            .map_err(CliError::spec)
    };
    let gadam_best_loss = full_loss(&outcome.best.theta)?;
    let adam_final_loss = full_loss(&baseline_theta)?;

    Ok(GadamSummary {
        gadam_best_loss,
        adam_final_loss,
        comm_entries: outcome.comm_entries,
        train_steps: outcome.train_steps,
        generations: reports.len(),
    })
}
