//! Analytic test objectives with closed-form gradients and known optima.

use crate::core::ParamVector;
use crate::error::{Error, Result};
use crate::models::{check_dim, Batch, Objective};

/// Convex quadratic `0.5 * theta' A theta - b' theta` for symmetric positive
/// definite `A`. Gradient `A theta - b`, optimum `A^{-1} b`.
pub struct QuadraticBowl {
    dim: usize,
    matrix: Vec<f64>, // row-major d x d
    offset: Vec<f64>,
    optimum: ParamVector,
}

impl QuadraticBowl {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 {
            return Err(Error::invalid("quadratic bowl: dimension must be at least 1"));
        }
        if matrix.iter().any(|row| row.len() != d) || offset.len() != d {
            return Err(Error::invalid("quadratic bowl: A must be d x d and b of length d"));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let (a, b) = (matrix[i][j], matrix[j][i]);
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs() + 1.0) {
                    return Err(Error::invalid(format!(
                        "quadratic bowl: A is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let flat: Vec<f64> = matrix.into_iter().flatten().collect();
        let chol = cholesky(&flat, d)
            .ok_or_else(|| Error::invalid("quadratic bowl: A is not positive definite"))?;
        let optimum = ParamVector::new(cholesky_solve(&chol, d, &offset))?;
        Ok(QuadraticBowl {
            dim: d,
            matrix: flat,
            offset,
            optimum,
        })
    }

    /// Bowl with `A = diag(entries)` and `b = 0`.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let d = entries.len();
        let mut matrix = vec![vec![0.0; d]; d];
        for (i, &e) in entries.iter().enumerate() {
            matrix[i][i] = e;
        }
        Self::new(matrix, vec![0.0; d])
    }
}

impl Objective for QuadraticBowl {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "quadratic_bowl"
    }

    fn eval(&self, theta: &ParamVector, _batch: Batch<'_>) -> Result<(f64, ParamVector)> {
        check_dim(self.name(), self.dim, theta)?;
        let t = theta.as_slice();
        let d = self.dim;
        let mut a_theta = vec![0.0; d];
        for i in 0..d {
            let row = &self.matrix[i * d..(i + 1) * d];
            a_theta[i] = row.iter().zip(t).map(|(&a, &x)| a * x).sum();
        }
        let quad: f64 = a_theta.iter().zip(t).map(|(&ax, &x)| ax * x).sum();
        let lin: f64 = self.offset.iter().zip(t).map(|(&b, &x)| b * x).sum();
        let loss = 0.5 * quad - lin;
        let grad: Vec<f64> = a_theta
            .iter()
            .zip(&self.offset)
            .map(|(&ax, &b)| ax - b)
            .collect();
        Ok((loss, ParamVector::new(grad)?))
    }

    fn optimum(&self) -> Option<ParamVector> {
        Some(self.optimum.clone())
    }
}

/// Lower-triangular Cholesky factor of a row-major symmetric matrix, or
/// `None` if a pivot is not strictly positive.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * d + j] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L' x = b` by forward then backward substitution.
fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * d + k] * y[k];
        }
        y[i] = sum / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut sum = y[i];
        for k in (i + 1)..d {
            sum -= l[k * d + i] * x[k];
        }
        x[i] = sum / l[i * d + i];
    }
    x
}

/// Chained Rosenbrock function; global optimum at all ones with value 0.
pub struct Rosenbrock {
    dim: usize,
}

impl Rosenbrock {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("rosenbrock: dimension must be at least 2"));
        }
        Ok(Rosenbrock { dim })
    }
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn eval(&self, theta: &ParamVector, _batch: Batch<'_>) -> Result<(f64, ParamVector)> {
        check_dim(self.name(), self.dim, theta)?;
        let x = theta.as_slice();
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim];
        for i in 0..self.dim - 1 {
            let gap = x[i + 1] - x[i] * x[i];
            let miss = 1.0 - x[i];
            loss += 100.0 * gap * gap + miss * miss;
            grad[i] += -400.0 * x[i] * gap - 2.0 * miss;
            grad[i + 1] += 200.0 * gap;
        }
        Ok((loss, ParamVector::new(grad)?))
    }

    fn optimum(&self) -> Option<ParamVector> {
        Some(ParamVector::new(vec![1.0; self.dim]).expect("all-ones is finite"))
    }
}

/// Rastrigin function (`A = 10`); heavily multimodal with the global optimum
/// at the origin and value 0.
pub struct Rastrigin {
    dim: usize,
}

impl Rastrigin {
    const A: f64 = 10.0;

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("rastrigin: dimension must be at least 1"));
        }
        Ok(Rastrigin { dim })
    }
}

impl Objective for Rastrigin {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "rastrigin"
    }

    fn eval(&self, theta: &ParamVector, _batch: Batch<'_>) -> Result<(f64, ParamVector)> {
        check_dim(self.name(), self.dim, theta)?;
        let x = theta.as_slice();
        let tau = std::f64::consts::TAU;
        let mut loss = Self::A * self.dim as f64;
        let mut grad = vec![0.0; self.dim];
        for (i, &v) in x.iter().enumerate() {
            loss += v * v - Self::A * (tau * v).cos();
            grad[i] = 2.0 * v + Self::A * tau * (tau * v).sin();
        }
        Ok((loss, ParamVector::new(grad)?))
    }

    fn optimum(&self) -> Option<ParamVector> {
        Some(ParamVector::zeros(self.dim))
    }
}
