//! The ten update rules behind a single stateful stepper.
//!
//! Each call to [`Stepper::step`] evaluates the gradient oracle exactly once
//! (NAG evaluates it at the look-ahead point, everyone else at the current
//! parameters) and applies one per-coordinate update:
//!
//! - vanilla / stochastic / mini-batch GD: `theta -= eta * g` (they differ
//!   only in which batch the driver feeds the oracle; SGD optionally decays
//!   `eta / (1 + lr_decay * updates_done)`)
//! - Momentum: `dv = rho*dv + (1-rho)*g; theta -= eta*dv`
//! - NAG: gradient at `theta - eta*rho*dv`, then the Momentum update
//! - Adagrad: `G += g*g; theta -= eta / sqrt(G + eps) * g`
//! - RMSprop: `G = rho*G + (1-rho)*g*g; theta -= eta / sqrt(G + eps) * g`
//! - Adadelta: `G = rho*G + (1-rho)*g*g;
//!   d = -sqrt(D + eps)/sqrt(G + eps) * g; D = rho*D + (1-rho)*d*d;
//!   theta += d` (no learning rate)
//! - Adam: `m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g*g;
//!   theta -= eta / (sqrt(v/(1-b2^t)) + eps) * m/(1-b1^t)`
//! - Nadam: Adam's statistics with the look-ahead blend
//!   `b1*m_hat + (1-b1)*g/(1-b1^t)` in place of `m_hat`
//!
//! The epsilon placement is intentional and differs between families: inside
//! the square root for Adagrad/RMSprop/Adadelta, outside for Adam/Nadam.
//! Accumulators store diagonals only (vectors, not matrices): the full outer
//! product `g g'` is never read off-diagonal by any of the update rules.

use crate::core::ParamVector;
use crate::error::{Error, Result};
use crate::optimizers::config::{OptimizerConfig, OptimizerKind};

/// Mutable accumulators of one optimizer run. Vectors are allocated only for
/// the fields the configured kind reads; the rest stay empty.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    /// Completed updates.
    pub step: u64,
    /// Momentum term (Momentum, NAG).
    pub delta_v: ParamVector,
    /// Accumulated squared gradients, the diagonal of G (Adagrad, RMSprop,
    /// Adadelta). Entries are nonnegative; for Adagrad they never decrease.
    pub sq_accum: ParamVector,
    /// Accumulated squared updates, the diagonal of the Adadelta Theta matrix.
    pub delta_accum: ParamVector,
    /// First-moment estimate (Adam, Nadam).
    pub m: ParamVector,
    /// Second-moment estimate (Adam, Nadam).
    pub v: ParamVector,
}

impl OptimizerState {
    fn new(kind: OptimizerKind, dim: usize) -> Self {
        let zeros_if = |used: bool| if used { ParamVector::zeros(dim) } else { ParamVector::zeros(0) };
        let momentum = matches!(kind, OptimizerKind::Momentum | OptimizerKind::Nag);
        let squares = matches!(
            kind,
            OptimizerKind::Adagrad | OptimizerKind::Rmsprop | OptimizerKind::Adadelta
        );
        let adamish = matches!(kind, OptimizerKind::Adam | OptimizerKind::Nadam);
        OptimizerState {
            step: 0,
            delta_v: zeros_if(momentum),
            sq_accum: zeros_if(squares),
            delta_accum: zeros_if(kind == OptimizerKind::Adadelta),
            m: zeros_if(adamish),
            v: zeros_if(adamish),
        }
    }
}

/// What one update produced, for tracing.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub theta: ParamVector,
    /// Loss reported by the gradient oracle (for NAG: at the look-ahead point).
    pub loss: f64,
    /// L2 norm of the gradient used for the update.
    pub grad_norm: f64,
}

/// One optimizer run's configuration plus state. Not shared between threads;
/// independent runs each own a stepper.
pub struct Stepper {
    config: OptimizerConfig,
    state: OptimizerState,
    dim: usize,
}

fn bias_correction(beta: f64, tau: u64) -> f64 {
    1.0 - beta.powi(i32::try_from(tau).unwrap_or(i32::MAX))
}

impl Stepper {
    pub fn new(config: OptimizerConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::invalid("stepper: dimension must be at least 1"));
        }
        let state = OptimizerState::new(config.kind, dim);
        Ok(Stepper { config, state, dim })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    /// Applies one update to `theta`, pulling the gradient from `grad_at`.
    ///
    /// The oracle is called exactly once per step, so gradient-evaluation
    /// budgets are comparable across kinds.
    pub fn step<F>(&mut self, theta: &ParamVector, mut grad_at: F) -> Result<StepOutcome>
    where
        F: FnMut(&ParamVector) -> Result<(f64, ParamVector)>,
    {
        if theta.len() != self.dim {
            return Err(Error::invalid(format!(
                "stepper: theta has length {}, expected {}",
                theta.len(),
                self.dim
            )));
        }
        let tau = self.state.step + 1;
        let cfg = &self.config;
        let (eta, rho, eps) = (cfg.eta, cfg.rho, cfg.epsilon);

        // NAG samples the gradient one step ahead; everyone else at theta.
        let (loss, grad) = match cfg.kind {
            OptimizerKind::Nag => {
                let ahead = eta * rho;
                let mut probe = theta.clone();
                for (p, &dv) in probe.as_mut_slice().iter_mut().zip(self.state.delta_v.as_slice()) {
                    *p -= ahead * dv;
                }
                grad_at(&probe)?
            }
            _ => grad_at(theta)?,
        };
        if grad.len() != self.dim {
            return Err(Error::invalid(format!(
                "stepper: gradient has length {}, expected {}",
                grad.len(),
                self.dim
            )));
        }
        if let Some(i) = grad.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::non_finite(format!("gradient at step {tau}"), i));
        }
        let g = grad.as_slice();
        let grad_norm = grad.norm();

        let mut next = theta.clone();
        let out = next.as_mut_slice();
        match cfg.kind {
            OptimizerKind::VanillaGd | OptimizerKind::MiniBatchGd => {
                for (t, &gi) in out.iter_mut().zip(g) {
                    *t -= eta * gi;
                }
            }
            OptimizerKind::Sgd => {
                // Optional decay; updates_done is the count before this step.
                let eta_tau = eta / (1.0 + cfg.lr_decay * self.state.step as f64);
                for (t, &gi) in out.iter_mut().zip(g) {
                    *t -= eta_tau * gi;
                }
            }
            OptimizerKind::Momentum | OptimizerKind::Nag => {
                let dv = self.state.delta_v.as_mut_slice();
                for i in 0..self.dim {
                    dv[i] = rho * dv[i] + (1.0 - rho) * g[i];
                    out[i] -= eta * dv[i];
                }
            }
            OptimizerKind::Adagrad => {
                let sq = self.state.sq_accum.as_mut_slice();
                for i in 0..self.dim {
                    sq[i] += g[i] * g[i];
                    out[i] -= eta / (sq[i] + eps).sqrt() * g[i];
                }
            }
            OptimizerKind::Rmsprop => {
                let sq = self.state.sq_accum.as_mut_slice();
                for i in 0..self.dim {
                    sq[i] = rho * sq[i] + (1.0 - rho) * g[i] * g[i];
                    out[i] -= eta / (sq[i] + eps).sqrt() * g[i];
                }
            }
            OptimizerKind::Adadelta => {
                let sq = self.state.sq_accum.as_mut_slice();
                let acc = self.state.delta_accum.as_mut_slice();
                for i in 0..self.dim {
                    sq[i] = rho * sq[i] + (1.0 - rho) * g[i] * g[i];
                    let delta = -((acc[i] + eps).sqrt() / (sq[i] + eps).sqrt()) * g[i];
                    acc[i] = rho * acc[i] + (1.0 - rho) * delta * delta;
                    out[i] += delta;
                }
            }
            OptimizerKind::Adam => {
                let bc1 = bias_correction(cfg.beta1, tau);
                let bc2 = bias_correction(cfg.beta2, tau);
                let m = self.state.m.as_mut_slice();
                let v = self.state.v.as_mut_slice();
                for i in 0..self.dim {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    out[i] -= eta / (v_hat.sqrt() + eps) * m_hat;
                }
            }
            OptimizerKind::Nadam => {
                let bc1 = bias_correction(cfg.beta1, tau);
                let bc2 = bias_correction(cfg.beta2, tau);
                let m = self.state.m.as_mut_slice();
                let v = self.state.v.as_mut_slice();
                for i in 0..self.dim {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    let blend = cfg.beta1 * m_hat + (1.0 - cfg.beta1) * g[i] / bc1;
                    out[i] -= eta / (v_hat.sqrt() + eps) * blend;
                }
            }
        }
        if let Some(i) = out.iter().position(|x| !x.is_finite()) {
            return Err(Error::non_finite(format!("parameters after step {tau}"), i));
        }
        self.state.step = tau;
        Ok(StepOutcome {
            theta: next,
            loss,
            grad_norm,
        })
    }
}
