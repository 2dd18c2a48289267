//! Differentiable objectives: the gradient oracles that optimizers consume.
//!
//! An [`Objective`] maps a parameter vector (and, for supervised models, a
//! dataset slice) to a scalar loss and its gradient. Implementations are
//! immutable and reentrant, so one objective can serve many concurrent runs.

pub mod analytic;
pub mod gradcheck;
pub mod supervised;
pub mod synth;

pub use analytic::{QuadraticBowl, Rastrigin, Rosenbrock};
pub use gradcheck::grad_check;
pub use supervised::{Mlp, MlpSpec, SoftmaxRegression};

use crate::core::{Dataset, ParamVector};
use crate::error::{Error, Result};

/// The data slice an evaluation sees.
#[derive(Clone, Copy)]
pub enum Batch<'a> {
    /// No data: analytic objectives only.
    None,
    /// Rows of a dataset selected by index.
    Rows(&'a Dataset, &'a [usize]),
}

impl<'a> Batch<'a> {
    pub fn len(&self) -> usize {
        match self {
            Batch::None => 0,
            Batch::Rows(_, idx) => idx.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A deterministic loss/gradient oracle over parameters of fixed dimension.
///
/// Supervised objectives return the MEAN loss over the batch, so learning
/// rates stay comparable across batch sizes.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    /// Loss and gradient at `theta` for `batch`.
    fn eval(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<(f64, ParamVector)>;

    /// Known optimum, when the objective has one in closed form.
    fn optimum(&self) -> Option<ParamVector> {
        None
    }

    /// Loss without the gradient; the default just drops the gradient.
    fn loss_only(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<f64> {
        self.eval(theta, batch).map(|(l, _)| l)
    }
}

pub(crate) fn check_dim(obj_name: &str, expected: usize, theta: &ParamVector) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::invalid(format!(
            "{obj_name}: parameter vector has length {}, expected {expected}",
            theta.len()
        )));
    }
    Ok(())
}
