//! descentlab — gradient-descent optimizers, a genetic-Adam hybrid, and a
//! reproducible benchmark harness.
//!
//! The crate is organized around five modules:
//!
//! - [`core`]: deterministic randomness, parameter vectors, datasets and
//!   mini-batch planning. Everything downstream builds on these.
//! - [`losses`]: MSE, MAE, hinge and cross-entropy losses with gradients
//!   with respect to the predictions.
//! - [`models`]: differentiable objectives (quadratic bowl, Rosenbrock,
//!   Rastrigin, softmax regression, a one-hidden-layer MLP) with analytic
//!   gradients and a finite-difference gradient checker.
//! - [`optimizers`]: ten update rules behind one stateful stepper
//!   (vanilla/stochastic/mini-batch GD, Momentum, NAG, Adagrad, RMSprop,
//!   Adadelta, Adam, Nadam), stop rules, and an epoch-driving training loop
//!   that emits convergence traces.
//! - [`gadam`]: a population of models trained with Adam each generation and
//!   evolved via fitness-weighted selection, crossover and mutation.
//!
//! Every random decision flows from a single 64-bit master seed through
//! derived [`core::Prng`] streams, so runs are bit-reproducible regardless of
//! worker count.

// Multi-slice lockstep loops in the numeric kernels read clearest indexed.
#![allow(clippy::needless_range_loop)]

pub mod core;
pub mod error;
pub mod gadam;
pub mod losses;
pub mod models;
pub mod optimizers;

pub use error::{Error, Result};
