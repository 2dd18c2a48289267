//! Genetic-Adam hybrid training.
//!
//! A population of unit models is trained with Adam each generation, scored
//! on sampled validation batches, and evolved: fitness-weighted parent
//! selection with replacement, per-entry crossover biased toward the fitter
//! parent, rare mutation, then culling the union of parents and children
//! back to the population size.
//!
//! Every stochastic choice draws from a stream derived from the master seed
//! and a stable address (purpose, generation, model id), never from thread
//! scheduling, so a run's output is bit-identical for any worker count.

pub mod evolve;
pub mod runner;

pub use evolve::{
    crossover, crossover_threshold, fitness_probabilities, mutate, mutation_rate, select_parents,
    select_top, should_stop, Fitness,
};
pub use runner::{
    append_reports_jsonl, init_population, run_gadam, train_generation, GadamOutcome,
    GenerationTraining,
};

use serde::{Deserialize, Serialize};

use crate::core::ParamVector;
use crate::error::{Error, Result};
use crate::optimizers::{OptimizerConfig, OptimizerKind};

/// One member of the population.
#[derive(Clone, Debug)]
pub struct UnitModel {
    /// Stable identifier; children receive fresh ids, survivors keep theirs.
    pub id: u64,
    pub theta: ParamVector,
    /// Validation loss from the most recent scoring (infinite for failed or
    /// not-yet-scored models).
    pub fitness: f64,
    /// Min-max normalized loss in [0, 1].
    pub normalized: f64,
    /// Generation the model joined the population.
    pub generation: usize,
}

/// Distribution used to resample mutated entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationResample {
    /// Fresh uniform draw from [0, 1). The default.
    #[default]
    Uniform01,
    /// Fresh normal draw, matching the initialization scale.
    Normal { sigma: f64 },
}

/// Hyperparameters of a Gadam run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadamConfig {
    /// Population size g.
    pub population: usize,
    /// Generation cap K.
    pub generations: usize,
    /// Adam updates per model per generation; each update samples a fresh
    /// training batch.
    pub epochs_per_generation: usize,
    /// Base mutation rate p.
    #[serde(default = "defaults::base_mutation_rate")]
    pub base_mutation_rate: f64,
    /// Evolution stop threshold lambda for the generation-total-loss delta.
    pub stop_threshold: f64,
    /// Inner optimizer; must be Adam.
    pub adam: OptimizerConfig,
    /// Training batch size per sampled mini-batch (supervised objectives).
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    /// Validation batch size per scoring event (supervised objectives).
    #[serde(default = "defaults::batch_size")]
    pub validation_batch: usize,
    /// Held-out fraction of the dataset used for validation scoring.
    #[serde(default = "defaults::validation_fraction")]
    pub validation_fraction: f64,
    /// Worker threads for population training. Any value produces identical
    /// results.
    #[serde(default = "defaults::workers")]
    pub workers: usize,
    /// Standard deviation for population initialization.
    #[serde(default = "defaults::init_sigma")]
    pub init_sigma: f64,
    #[serde(default)]
    pub mutation_resample: MutationResample,
    /// Early-stop tolerance for a model's per-generation Adam run: stop when
    /// the batch loss changes by less than this between updates.
    #[serde(default)]
    pub adam_stop_delta: Option<f64>,
}

mod defaults {
    pub fn base_mutation_rate() -> f64 {
        0.01
    }
    pub fn batch_size() -> usize {
        32
    }
    pub fn validation_fraction() -> f64 {
        0.2
    }
    pub fn workers() -> usize {
        1
    }
    pub fn init_sigma() -> f64 {
        1.0
    }
}

impl GadamConfig {
    /// Config with documented defaults around the required sizes.
    pub fn new(population: usize, generations: usize, epochs_per_generation: usize) -> Self {
        GadamConfig {
            population,
            generations,
            epochs_per_generation,
            base_mutation_rate: defaults::base_mutation_rate(),
            stop_threshold: 1e-12,
            adam: OptimizerConfig::new(OptimizerKind::Adam),
            batch_size: defaults::batch_size(),
            validation_batch: defaults::batch_size(),
            validation_fraction: defaults::validation_fraction(),
            workers: defaults::workers(),
            init_sigma: defaults::init_sigma(),
            mutation_resample: MutationResample::default(),
            adam_stop_delta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("gadam: population must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::invalid("gadam: generations must be at least 1"));
        }
        if self.stop_threshold <= 0.0 || self.stop_threshold.is_nan() {
            return Err(Error::invalid(format!(
                "gadam: stop threshold must be positive, got {}",
                self.stop_threshold
            )));
        }
        if self.adam.kind != OptimizerKind::Adam {
            return Err(Error::invalid(format!(
                "gadam: inner optimizer must be adam, got {}",
                self.adam.kind
            )));
        }
        self.adam.validate()?;
        if !(0.0..=1.0).contains(&self.base_mutation_rate) {
            return Err(Error::invalid(format!(
                "gadam: base mutation rate must be in [0, 1], got {}",
                self.base_mutation_rate
            )));
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) {
            return Err(Error::invalid("gadam: init_sigma must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("gadam: need at least one worker"));
        }
        if self.batch_size == 0 || self.validation_batch == 0 {
            return Err(Error::invalid("gadam: batch sizes must be at least 1"));
        }
        if let MutationResample::Normal { sigma } = self.mutation_resample {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::invalid("gadam: mutation resample sigma must be positive"));
            }
        }
        Ok(())
    }
}

/// Summary of one evolution cycle, also serialized to the JSONL report file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    /// Trained parents' validation losses (the fitness-scoring batch).
    pub losses: Vec<f64>,
    /// Parent selection probabilities; sum to 1.
    pub probabilities: Vec<f64>,
    /// Losses of the selected next generation on the shared selection batch.
    pub selected_losses: Vec<f64>,
    /// Best model after selection.
    pub best_id: u64,
    pub best_loss: f64,
    /// Sum of `selected_losses`; drives the stop criterion.
    pub total_loss: f64,
    /// Parameter entries exchanged during this generation's crossover.
    pub comm_entries: u64,
}
