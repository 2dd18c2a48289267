//! Optimizer selection and hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten update rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    VanillaGd,
    Sgd,
    MiniBatchGd,
    Momentum,
    Nag,
    Adagrad,
    Rmsprop,
    Adadelta,
    Adam,
    Nadam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 10] = [
        OptimizerKind::VanillaGd,
        OptimizerKind::Sgd,
        OptimizerKind::MiniBatchGd,
        OptimizerKind::Momentum,
        OptimizerKind::Nag,
        OptimizerKind::Adagrad,
        OptimizerKind::Rmsprop,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
        OptimizerKind::Nadam,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::VanillaGd => "vanilla_gd",
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::MiniBatchGd => "mini_batch_gd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Nag => "nag",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Nadam => "nadam",
        }
    }

    /// Adadelta derives its step size from accumulated statistics and is the
    /// only rule that ignores the learning rate.
    pub fn uses_eta(self) -> bool {
        self != OptimizerKind::Adadelta
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters for a [`Stepper`](crate::optimizers::Stepper). Fields not
/// used by a given kind are ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Learning rate. Ignored by Adadelta.
    #[serde(default = "defaults::eta")]
    pub eta: f64,
    /// Momentum / decay weight for Momentum, NAG, RMSprop and Adadelta.
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    /// First-moment decay (Adam, Nadam).
    #[serde(default = "defaults::beta1")]
    pub beta1: f64,
    /// Second-moment decay (Adam, Nadam).
    #[serde(default = "defaults::beta2")]
    pub beta2: f64,
    /// Division-by-zero smoothing term.
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    /// SGD learning-rate decay: `eta / (1 + lr_decay * updates_done)`.
    /// Zero disables the schedule.
    #[serde(default)]
    pub lr_decay: f64,
}

mod defaults {
    pub fn eta() -> f64 {
        1e-3
    }
    pub fn rho() -> f64 {
        0.9
    }
    pub fn beta1() -> f64 {
        0.9
    }
    pub fn beta2() -> f64 {
        0.999
    }
    pub fn epsilon() -> f64 {
        1e-8
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            eta: defaults::eta(),
            rho: defaults::rho(),
            beta1: defaults::beta1(),
            beta2: defaults::beta2(),
            epsilon: defaults::epsilon(),
            lr_decay: 0.0,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_eta() && !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!(
                "{}: eta must be positive and finite, got {}",
                self.kind, self.eta
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid(format!(
                "beta1/beta2 must be in [0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(Error::invalid(format!(
                "lr_decay must be nonnegative, got {}",
                self.lr_decay
            )));
        }
        Ok(())
    }
}
