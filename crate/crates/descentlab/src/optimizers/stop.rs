//! Convergence tests for the training loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What ends a run, besides the mandatory iteration cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMode {
    /// Stop when the loss change between two sequential updates is below the
    /// threshold.
    LossDelta(f64),
    /// Stop when the parameter change (L2) of the last update is below the
    /// threshold.
    ParamDelta(f64),
    /// Stop after this many updates.
    MaxIters(u64),
}

/// A stop mode plus the cap that always applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub mode: StopMode,
    /// Hard iteration limit, checked regardless of mode.
    pub cap: u64,
}

impl StopRule {
    pub fn max_iters(n: u64) -> Self {
        StopRule {
            mode: StopMode::MaxIters(n),
            cap: n,
        }
    }

    pub fn loss_delta(threshold: f64, cap: u64) -> Self {
        StopRule {
            mode: StopMode::LossDelta(threshold),
            cap,
        }
    }

    pub fn param_delta(threshold: f64, cap: u64) -> Self {
        StopRule {
            mode: StopMode::ParamDelta(threshold),
            cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            return Err(Error::invalid("stop rule cap must be at least 1"));
        }
        match self.mode {
            StopMode::LossDelta(t) | StopMode::ParamDelta(t) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::invalid(format!(
                        "stop threshold must be positive and finite, got {t}"
                    )));
                }
            }
            StopMode::MaxIters(n) => {
                if n == 0 {
                    return Err(Error::invalid("max_iters must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::loss_delta(1e-8, 10_000)
    }
}

/// Everything the stop test may look at after an update.
#[derive(Clone, Copy, Debug)]
pub struct StopContext<'a> {
    /// Per-update losses so far, oldest first.
    pub losses: &'a [f64],
    /// L2 norm of the last parameter update, if any update happened.
    pub last_param_delta: Option<f64>,
    /// Number of updates completed.
    pub iterations: u64,
}

/// True iff the configured condition (or the cap) holds.
pub fn check_stop(rule: &StopRule, ctx: &StopContext<'_>) -> bool {
    if ctx.iterations >= rule.cap {
        return true;
    }
    match rule.mode {
        StopMode::LossDelta(threshold) => {
            let k = ctx.losses.len();
            k >= 2 && (ctx.losses[k - 1] - ctx.losses[k - 2]).abs() < threshold
        }
        StopMode::ParamDelta(threshold) => ctx.last_param_delta.is_some_and(|d| d < threshold),
        StopMode::MaxIters(n) => ctx.iterations >= n,
    }
}
