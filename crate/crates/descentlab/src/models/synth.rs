//! Synthetic dataset generators. Both emit datasets compatible with the CSV
//! format in [`crate::core::dataset`].

use crate::core::{Dataset, Prng};
use crate::error::{Error, Result};

/// Balanced Gaussian blob classification data: `classes` cluster centers
/// drawn from `N(0, 2^2)` per coordinate, instances assigned round-robin and
/// scattered around their center with standard deviation `noise`. Labels are
/// one-hot.
pub fn gaussian_blobs(
    n: usize,
    d_x: usize,
    classes: usize,
    noise: f64,
    rng: &mut Prng,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::invalid("gaussian_blobs: need at least 2 classes"));
    }
    if n < classes {
        return Err(Error::invalid("gaussian_blobs: need at least one instance per class"));
    }
    if noise < 0.0 || !noise.is_finite() {
        return Err(Error::invalid(format!("gaussian_blobs: bad noise {noise}")));
    }
    let centers: Vec<f64> = (0..classes * d_x).map(|_| rng.normal(2.0)).collect();
    let mut features = Vec::with_capacity(n * d_x);
    let mut labels = Vec::with_capacity(n * classes);
    for i in 0..n {
        let class = i % classes;
        let center = &centers[class * d_x..(class + 1) * d_x];
        for &c in center {
            features.push(c + rng.normal(noise));
        }
        for k in 0..classes {
            labels.push(if k == class { 1.0 } else { 0.0 });
        }
    }
    Dataset::new(n, d_x, classes, features, labels)
}

/// Linear regression data `y = W x + b + noise * N(0, I)` with `W`, `b` and
/// the inputs all drawn from the standard normal.
pub fn linear_data(
    n: usize,
    d_x: usize,
    d_y: usize,
    noise: f64,
    rng: &mut Prng,
) -> Result<Dataset> {
    if n == 0 || d_x == 0 || d_y == 0 {
        return Err(Error::invalid("linear_data: n, d_x and d_y must be positive"));
    }
    if noise < 0.0 || !noise.is_finite() {
        return Err(Error::invalid(format!("linear_data: bad noise {noise}")));
    }
    let weights: Vec<f64> = (0..d_y * d_x).map(|_| rng.normal(1.0)).collect();
    let bias: Vec<f64> = (0..d_y).map(|_| rng.normal(1.0)).collect();
    let mut features = Vec::with_capacity(n * d_x);
    let mut labels = Vec::with_capacity(n * d_y);
    for _ in 0..n {
        let x: Vec<f64> = (0..d_x).map(|_| rng.normal(1.0)).collect();
        for k in 0..d_y {
            let row = &weights[k * d_x..(k + 1) * d_x];
            let mean: f64 = bias[k] + row.iter().zip(&x).map(|(&w, &v)| w * v).sum::<f64>();
            labels.push(mean + rng.normal(noise));
        }
        features.extend_from_slice(&x);
    }
    Dataset::new(n, d_x, d_y, features, labels)
}
