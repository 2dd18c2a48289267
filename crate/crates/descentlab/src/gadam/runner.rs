//! Population lifecycle: initialization, per-generation Adam training, and
//! the full evolution loop.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::core::{init_normal, Dataset, Prng};
use crate::error::{Error, Result};
use crate::gadam::evolve::{
    crossover, fitness_probabilities, mutate, select_parents, select_top, should_stop,
};
use crate::gadam::{GadamConfig, GenerationReport, UnitModel};
use crate::models::{Batch, Objective};
use crate::optimizers::Stepper;

// Stream addresses under the master seed. Each random decision lives at a
// fixed (purpose, generation, index) path so results cannot depend on
// scheduling.
const STREAM_SPLIT: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_TRAIN: u64 = 3;
const STREAM_EVOLVE: u64 = 4;
const STREAM_CHILD: u64 = 5;

/// Result of training one generation.
pub struct GenerationTraining {
    pub models: Vec<UnitModel>,
    /// Whether the corresponding model hit a numeric error while training;
    /// failed models keep their last good parameters and score as infinite.
    pub failed: Vec<bool>,
    /// Total optimizer updates performed.
    pub steps: u64,
}

/// `g` models with independent `N(0, sigma^2)` parameter vectors, one derived
/// stream per model.
pub fn init_population(cfg: &GadamConfig, obj: &dyn Objective, master: &Prng) -> Result<Vec<UnitModel>> {
    cfg.validate()?;
    let init = master.derive(STREAM_INIT);
    (0..cfg.population)
        .map(|i| {
            let mut rng = init.derive(i as u64);
            Ok(UnitModel {
                id: i as u64,
                theta: init_normal(obj.dim(), cfg.init_sigma, &mut rng)?,
                fitness: f64::INFINITY,
                normalized: 0.0,
                generation: 0,
            })
        })
        .collect()
}

fn train_one(
    model: &UnitModel,
    obj: &dyn Objective,
    data: Option<&Dataset>,
    cfg: &GadamConfig,
    mut rng: Prng,
) -> (UnitModel, bool, u64) {
    let mut out = model.clone();
    let mut stepper = match Stepper::new(cfg.adam.clone(), obj.dim()) {
        Ok(s) => s,
        Err(_) => return (out, true, 0),
    };
    let mut prev_loss: Option<f64> = None;
    let mut steps = 0u64;
    let mut failed = false;
    for _ in 0..cfg.epochs_per_generation {
        // "Epoch" here is one update on a freshly sampled batch.
        let indices: Option<Vec<usize>> =
            data.map(|ds| (0..cfg.batch_size).map(|_| rng.index(ds.len())).collect());
        let result = stepper.step(&out.theta, |t| match (data, &indices) {
            (Some(ds), Some(idx)) => obj.eval(t, Batch::Rows(ds, idx)),
            _ => obj.eval(t, Batch::None),
        });
        match result {
            Ok(step) => {
                steps += 1;
                out.theta = step.theta;
                let converged = cfg
                    .adam_stop_delta
                    .is_some_and(|tol| prev_loss.is_some_and(|p| (p - step.loss).abs() < tol));
                prev_loss = Some(step.loss);
                if converged {
                    break;
                }
            }
            Err(_) => {
                failed = true;
                break;
            }
        }
    }
    (out, failed, steps)
}

/// Trains every model in `pop` for the generation's epoch budget with its own
/// Adam state and its own `(generation, id)`-derived stream. Models are
/// mutually independent here, so they run on the worker pool.
pub fn train_generation(
    pop: &[UnitModel],
    obj: &dyn Objective,
    data: Option<&Dataset>,
    cfg: &GadamConfig,
    generation: usize,
    master: &Prng,
    pool: &rayon::ThreadPool,
) -> GenerationTraining {
    let train = master.derive(STREAM_TRAIN).derive(generation as u64);
    let results: Vec<(UnitModel, bool, u64)> = pool.install(|| {
        pop.par_iter()
            .map(|m| train_one(m, obj, data, cfg, train.derive(m.id)))
            .collect()
    });
    let mut models = Vec::with_capacity(results.len());
    let mut failed = Vec::with_capacity(results.len());
    let mut steps = 0;
    for (m, f, s) in results {
        models.push(m);
        failed.push(f);
        steps += s;
    }
    GenerationTraining {
        models,
        failed,
        steps,
    }
}

fn sample_validation(val: Option<&Dataset>, batch: usize, rng: &mut Prng) -> Option<Vec<usize>> {
    val.map(|ds| (0..batch).map(|_| rng.index(ds.len())).collect())
}

/// Scores each model on the given batch; failed models and non-finite losses
/// become infinite.
fn score_all(
    models: &[UnitModel],
    failed: &[bool],
    obj: &dyn Objective,
    val: Option<&Dataset>,
    indices: Option<&Vec<usize>>,
    pool: &rayon::ThreadPool,
) -> Vec<f64> {
    pool.install(|| {
        models
            .par_iter()
            .zip(failed.par_iter())
            .map(|(m, &bad)| {
                if bad {
                    return f64::INFINITY;
                }
                let batch = match (val, indices) {
                    (Some(ds), Some(idx)) => Batch::Rows(ds, idx),
                    _ => Batch::None,
                };
                match obj.loss_only(&m.theta, batch) {
                    Ok(l) if l.is_finite() => l,
                    _ => f64::INFINITY,
                }
            })
            .collect()
    })
}

/// Final result of [`run_gadam`].
pub struct GadamOutcome {
    /// Lowest-loss model of the final generation.
    pub best: UnitModel,
    /// Parameter entries exchanged across all crossover steps:
    /// `generations_run * population * 2 * dim`.
    pub comm_entries: u64,
    /// Optimizer updates spent across all models and generations; the
    /// matched-budget baseline gets exactly this many.
    pub train_steps: u64,
}

/// Runs the evolution loop until the stop test fires. Reports accumulate in
/// `reports`, which keeps everything produced so far if a generation becomes
/// unrecoverable.
pub fn run_gadam(
    cfg: &GadamConfig,
    obj: &dyn Objective,
    data: Option<&Dataset>,
    seed: u64,
    reports: &mut Vec<GenerationReport>,
) -> Result<GadamOutcome> {
    cfg.validate()?;
    let master = Prng::new(seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;

    // Validation scores come from a held-out split when one can be carved
    // out; tiny datasets fall back to scoring on the training split.
    let (train_set, val_set) = match data {
        None => (None, None),
        Some(ds) => {
            let mut split_rng = master.derive(STREAM_SPLIT);
            let (kept, held) = ds.split_holdout(cfg.validation_fraction, &mut split_rng)?;
            let val = held.unwrap_or_else(|| kept.clone());
            (Some(kept), Some(val))
        }
    };
    let train_ref = train_set.as_ref();
    let val_ref = val_set.as_ref();

    let dim = obj.dim() as u64;
    let g = cfg.population;
    let mut pop = init_population(cfg, obj, &master)?;
    let mut next_id = g as u64;
    let mut evolve_rng = master.derive(STREAM_EVOLVE);
    let mut comm_total = 0u64;
    let mut train_steps = 0u64;

    for generation in 0usize.. {
        // Train parents with fresh Adam state.
        let parents = train_generation(&pop, obj, train_ref, cfg, generation, &master, &pool);
        train_steps += parents.steps;

        // Fitness on a sampled validation batch.
        let fit_idx = sample_validation(val_ref, cfg.validation_batch, &mut evolve_rng);
        let losses = score_all(
            &parents.models,
            &parents.failed,
            obj,
            val_ref,
            fit_idx.as_ref(),
            &pool,
        );
        let fitness = fitness_probabilities(&losses).map_err(|e| match e {
            Error::Generation { message, .. } => Error::Generation {
                generation,
                message,
            },
            other => other,
        })?;
        let mut parent_models = parents.models;
        for ((m, &l), &n) in parent_models
            .iter_mut()
            .zip(&losses)
            .zip(&fitness.normalized)
        {
            m.fitness = l;
            m.normalized = n;
        }

        // Evolve: pairs -> crossover -> mutation. Reading two parent vectors
        // per child is the only cross-model communication.
        let pairs = select_parents(&fitness.probabilities, g, &mut evolve_rng);
        let child_stream = master.derive(STREAM_CHILD).derive(generation as u64);
        let mut children = Vec::with_capacity(g);
        for (c, &(i, j)) in pairs.iter().enumerate() {
            let mut rng = child_stream.derive(c as u64);
            let crossed = crossover(&parent_models[i], &parent_models[j], &mut rng)?;
            let mutated = mutate(
                &crossed,
                fitness.probabilities[i],
                fitness.probabilities[j],
                cfg.base_mutation_rate,
                cfg.mutation_resample,
                &mut rng,
            )?;
            children.push(UnitModel {
                id: next_id,
                theta: mutated,
                fitness: f64::INFINITY,
                normalized: 0.0,
                generation: generation + 1,
            });
            next_id += 1;
        }
        let comm_this_gen = 2 * g as u64 * dim;
        comm_total += comm_this_gen;

        // Children train with the same per-generation budget.
        let trained_children =
            train_generation(&children, obj, train_ref, cfg, generation, &master, &pool);
        train_steps += trained_children.steps;

        // Cull parents ∪ children to the top g on one fresh shared batch.
        let sel_idx = sample_validation(val_ref, cfg.validation_batch, &mut evolve_rng);
        let mut candidates = parent_models;
        let mut candidate_failed = parents.failed;
        candidates.extend(trained_children.models);
        candidate_failed.extend(trained_children.failed);
        let scores = score_all(
            &candidates,
            &candidate_failed,
            obj,
            val_ref,
            sel_idx.as_ref(),
            &pool,
        );
        if scores.iter().all(|s| s.is_infinite()) {
            return Err(Error::Generation {
                generation,
                message: "every candidate scored infinite on the selection batch".into(),
            });
        }
        for (m, &s) in candidates.iter_mut().zip(&scores) {
            m.fitness = s;
        }
        let selected = select_top(candidates, g);

        let selected_losses: Vec<f64> = selected.iter().map(|m| m.fitness).collect();
        let report = GenerationReport {
            generation,
            losses,
            probabilities: fitness.probabilities,
            best_id: selected[0].id,
            best_loss: selected[0].fitness,
            total_loss: selected_losses.iter().sum(),
            selected_losses,
            comm_entries: comm_this_gen,
        };
        pop = selected;
        let stop = should_stop(
            reports.last(),
            &report,
            cfg.stop_threshold,
            cfg.generations,
        );
        reports.push(report);
        if stop {
            break;
        }
    }

    let best = pop
        .iter()
        .min_by(|a, b| a.fitness.total_cmp(&b.fitness).then(a.id.cmp(&b.id)))
        .expect("population is non-empty")
        .clone();
    Ok(GadamOutcome {
        best,
        comm_entries: comm_total,
        train_steps,
    })
}

/// Appends one JSON object per report to a JSON-lines file.
pub fn append_reports_jsonl(path: impl AsRef<Path>, reports: &[GenerationReport]) -> Result<()> {
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut out = std::io::BufWriter::new(file);
    for r in reports {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::invalid(format!("report serialization: {e}")))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
