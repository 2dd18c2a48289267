//! The epoch-driving training loop and its convergence trace.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::core::csv::{format_f64, Table};
use crate::core::{init_normal, shuffle_and_partition, Dataset, ParamVector, Prng};
use crate::error::{Error, Result};
use crate::models::{Batch, Objective};
use crate::optimizers::config::{OptimizerConfig, OptimizerKind};
use crate::optimizers::stepper::Stepper;
use crate::optimizers::stop::{check_stop, StopContext, StopRule};

/// Configuration of one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub stop: StopRule,
    /// Mini-batch size for the mini-batch family. Vanilla GD always uses the
    /// whole set and SGD forces single-instance batches. Clamped to the
    /// dataset size.
    pub batch_size: usize,
    pub run_id: String,
}

impl TrainConfig {
    pub fn new(optimizer: OptimizerConfig, stop: StopRule, run_id: impl Into<String>) -> Self {
        TrainConfig {
            optimizer,
            stop,
            batch_size: 32,
            run_id: run_id.into(),
        }
    }
}

/// One row of the convergence log; written once per variable update.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub run_id: String,
    pub optimizer: String,
    pub epoch: u64,
    /// Cumulative update count, 1-based.
    pub iteration: u64,
    pub batch_index: u64,
    /// Loss reported by the gradient oracle for this update's batch.
    pub loss: f64,
    pub grad_norm: f64,
    /// Informative only; excluded from determinism comparisons.
    pub wall_ms: f64,
}

/// Runs the optimizer from an explicit starting point. Appends one record
/// per update to `trace`, which keeps everything recorded so far if a step
/// fails mid-run.
pub fn train_from(
    obj: &dyn Objective,
    data: Option<&Dataset>,
    theta0: ParamVector,
    cfg: &TrainConfig,
    rng: &mut Prng,
    trace: &mut Vec<TraceRecord>,
) -> Result<ParamVector> {
    cfg.stop.validate()?;
    let mut stepper = Stepper::new(cfg.optimizer.clone(), obj.dim())?;
    let kind = cfg.optimizer.kind;
    let started = Instant::now();
    let mut theta = theta0;
    let mut losses: Vec<f64> = Vec::new();

    let record = |trace: &mut Vec<TraceRecord>, epoch: u64, batch_index: u64, iteration: u64, loss: f64, grad_norm: f64| {
        trace.push(TraceRecord {
            run_id: cfg.run_id.clone(),
            optimizer: kind.as_str().to_owned(),
            epoch,
            iteration,
            batch_index,
            loss,
            grad_norm,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    };

    match data {
        None => {
            // Analytic objective: every update sees the full objective, and
            // an epoch is a single update.
            let mut iterations = 0u64;
            loop {
                let out = stepper.step(&theta, |t| obj.eval(t, Batch::None))?;
                iterations += 1;
                let delta = out.theta.sub(&theta)?.norm();
                theta = out.theta;
                losses.push(out.loss);
                record(trace, iterations - 1, 0, iterations, out.loss, out.grad_norm);
                let ctx = StopContext {
                    losses: &losses,
                    last_param_delta: Some(delta),
                    iterations,
                };
                if check_stop(&cfg.stop, &ctx) {
                    break;
                }
            }
        }
        Some(ds) => {
            let n = ds.len();
            let batch_size = match kind {
                OptimizerKind::VanillaGd => n,
                OptimizerKind::Sgd => 1,
                _ => cfg.batch_size.clamp(1, n),
            };
            let full_order: Vec<usize> = (0..n).collect();
            let mut iterations = 0u64;
            'epochs: for epoch in 0u64.. {
                // Vanilla GD consumes the whole set in order; the rest
                // reshuffle every epoch.
                let plan = if kind == OptimizerKind::VanillaGd {
                    None
                } else {
                    Some(shuffle_and_partition(n, batch_size, rng)?)
                };
                let num_batches = plan.as_ref().map_or(1, |p| p.num_batches());
                for bi in 0..num_batches {
                    let indices: &[usize] = match &plan {
                        None => &full_order,
                        Some(p) => p.batch(bi),
                    };
                    let out = stepper.step(&theta, |t| obj.eval(t, Batch::Rows(ds, indices)))?;
                    iterations += 1;
                    let delta = out.theta.sub(&theta)?.norm();
                    theta = out.theta;
                    losses.push(out.loss);
                    record(trace, epoch, bi as u64, iterations, out.loss, out.grad_norm);
                    let ctx = StopContext {
                        losses: &losses,
                        last_param_delta: Some(delta),
                        iterations,
                    };
                    if check_stop(&cfg.stop, &ctx) {
                        break 'epochs;
                    }
                }
            }
        }
    }
    Ok(theta)
}

/// Initializes `theta ~ N(0, sigma^2)` from `rng`, then trains.
pub fn train(
    obj: &dyn Objective,
    data: Option<&Dataset>,
    init_sigma: f64,
    cfg: &TrainConfig,
    rng: &mut Prng,
    trace: &mut Vec<TraceRecord>,
) -> Result<ParamVector> {
    let theta0 = init_normal(obj.dim(), init_sigma, rng)?;
    train_from(obj, data, theta0, cfg, rng, trace)
}

pub const TRACE_HEADERS: [&str; 8] = [
    "run_id",
    "optimizer",
    "epoch",
    "iteration",
    "batch_index",
    "loss",
    "grad_norm",
    "wall_ms",
];

pub fn trace_table(records: &[TraceRecord]) -> Table {
    let mut table = Table::new(TRACE_HEADERS.iter().map(|s| (*s).to_owned()).collect());
    for r in records {
        table.push_row(vec![
            r.run_id.clone(),
            r.optimizer.clone(),
            r.epoch.to_string(),
            r.iteration.to_string(),
            r.batch_index.to_string(),
            format_f64(r.loss),
            format_f64(r.grad_norm),
            format_f64(r.wall_ms),
        ]);
    }
    table
}

pub fn write_trace_csv(path: impl AsRef<Path>, records: &[TraceRecord]) -> Result<()> {
    trace_table(records).save(path)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let table = Table::load(path)?;
    if table.headers != TRACE_HEADERS {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("unexpected trace headers {:?}", table.headers),
        });
    }
    let mut records = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        records.push(TraceRecord {
            run_id: row[0].clone(),
            optimizer: row[1].clone(),
            epoch: table.number(i, 2)? as u64,
            iteration: table.number(i, 3)? as u64,
            batch_index: table.number(i, 4)? as u64,
            loss: table.number(i, 5)?,
            grad_norm: table.number(i, 6)?,
            wall_ms: table.number(i, 7)?,
        });
    }
    Ok(records)
}
