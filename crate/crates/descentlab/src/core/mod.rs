//! Shared foundations: deterministic randomness, parameter vectors, datasets,
//! CSV tables, and mini-batch planning.
//!
//! Value types here are immutable after construction and safe to share across
//! threads. [`Prng`] is single-owner; anything that runs in parallel derives
//! its own child stream.

pub mod batch;
pub mod csv;
pub mod dataset;
pub mod prng;
pub mod vector;

pub use batch::{shuffle_and_partition, BatchPlan};
pub use dataset::Dataset;
pub use prng::Prng;
pub use vector::{init_normal, ParamVector};
