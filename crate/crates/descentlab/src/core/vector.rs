//! Flat parameter vectors and elementwise arithmetic.
//!
//! The length of a [`ParamVector`] is fixed at construction; every binary
//! operation checks that both operands agree. Every operation also rejects
//! non-finite results, reporting the offending coordinate, so NaN/Inf never
//! propagate silently into a training run.

use crate::core::Prng;
use crate::error::{Error, Result};

/// Real-valued variable vector of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    /// Wraps `values`, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let v = ParamVector { values };
        v.check_finite("construction")?;
        Ok(v)
    }

    pub fn zeros(d: usize) -> Self {
        ParamVector {
            values: vec![0.0; d],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Errors with `context` and the first offending index if any entry is
    /// NaN or infinite.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        match self.values.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::non_finite(context, i)),
        }
    }

    fn check_len(&self, other: &Self, op: &str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "{op}: length mismatch {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    fn map2(&self, other: &Self, op: &str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_len(other, op)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let out = ParamVector { values };
        out.check_finite(op)?;
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.map2(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.map2(other, "sub", |a, b| a - b)
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.map2(other, "hadamard", |a, b| a * b)
    }

    /// Elementwise quotient. Callers are expected to keep divisor entries
    /// away from zero (typically by adding a smoothing epsilon first).
    pub fn div_elem(&self, other: &Self) -> Result<Self> {
        self.map2(other, "div_elem", |a, b| a / b)
    }

    pub fn scale(&self, k: f64) -> Result<Self> {
        let out = ParamVector {
            values: self.values.iter().map(|&a| a * k).collect(),
        };
        out.check_finite("scale")?;
        Ok(out)
    }

    /// Elementwise square root.
    pub fn sqrt_elem(&self) -> Result<Self> {
        let out = ParamVector {
            values: self.values.iter().map(|&a| a.sqrt()).collect(),
        };
        out.check_finite("sqrt_elem")?;
        Ok(out)
    }

    /// L2 norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&a| a * a).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// `d` samples from `N(0, sigma^2)` drawn from `rng` via Box–Muller.
pub fn init_normal(d: usize, sigma: f64, rng: &mut Prng) -> Result<ParamVector> {
    if d == 0 {
        return Err(Error::invalid("init_normal: dimension must be at least 1"));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "init_normal: sigma must be positive and finite, got {sigma}"
        )));
    }
    let values = (0..d).map(|_| rng.normal(sigma)).collect();
    ParamVector::new(values)
}
