//! Epoch planning: shuffle the instance indices, then cut them into
//! consecutive mini-batches.

use crate::core::Prng;
use crate::error::{Error, Result};

/// One epoch's worth of mini-batches over a permutation of `[0, n)`.
///
/// All batches have size `b` except possibly the last, which holds the
/// `n mod b` remainder. The partial batch is kept and used.
#[derive(Clone, Debug)]
pub struct BatchPlan {
    order: Vec<usize>,
    batch_size: usize,
}

impl BatchPlan {
    pub fn num_batches(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }

    pub fn batch(&self, k: usize) -> &[usize] {
        let start = k * self.batch_size;
        let end = (start + self.batch_size).min(self.order.len());
        &self.order[start..end]
    }

    pub fn batches(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.num_batches()).map(|k| self.batch(k))
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Uniform random permutation of `[0, n)` (Fisher–Yates driven by `rng`)
/// split into `ceil(n / b)` consecutive slices.
pub fn shuffle_and_partition(n: usize, b: usize, rng: &mut Prng) -> Result<BatchPlan> {
    if n == 0 {
        return Err(Error::invalid("cannot partition an empty index range"));
    }
    if b == 0 || b > n {
        return Err(Error::invalid(format!(
            "batch size must satisfy 1 <= b <= n, got b={b}, n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.index(i + 1));
    }
    Ok(BatchPlan {
        order,
        batch_size: b,
    })
}
