//! Feature/label datasets and their CSV representation.
//!
//! The on-disk format has a header row naming columns `x_0..x_{d_x-1}` then
//! `y_0..y_{d_y-1}`; every following row is one instance.

use std::path::Path;

use crate::core::csv::{format_f64, Table};
use crate::core::Prng;
use crate::error::{Error, Result};

/// `n` feature rows of width `d_x` paired with label rows of width `d_y`,
/// both stored row-major. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<f64>,
    n: usize,
    d_x: usize,
    d_y: usize,
}

impl Dataset {
    pub fn new(n: usize, d_x: usize, d_y: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dataset must contain at least one instance"));
        }
        if d_x == 0 || d_y == 0 {
            return Err(Error::invalid("feature and label dimensions must be at least 1"));
        }
        if features.len() != n * d_x || labels.len() != n * d_y {
            return Err(Error::invalid(format!(
                "dataset shape mismatch: {} features and {} labels for n={n}, d_x={d_x}, d_y={d_y}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::non_finite("dataset features", i));
        }
        if let Some(i) = labels.iter().position(|x| !x.is_finite()) {
            return Err(Error::non_finite("dataset labels", i));
        }
        Ok(Dataset {
            features,
            labels,
            n,
            d_x,
            d_y,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn feature_dim(&self) -> usize {
        self.d_x
    }

    pub fn label_dim(&self) -> usize {
        self.d_y
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d_x..(i + 1) * self.d_x]
    }

    pub fn label_row(&self, i: usize) -> &[f64] {
        &self.labels[i * self.d_y..(i + 1) * self.d_y]
    }

    /// Checks that every label row is one-hot: exactly one entry equal to 1
    /// and the rest 0.
    pub fn validate_one_hot(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.label_row(i);
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::invalid(format!(
                    "label row {i} is not one-hot: {row:?}"
                )));
            }
        }
        Ok(())
    }

    /// Splits off a held-out tail of `floor(fraction * n)` instances chosen
    /// by a seeded permutation. Returns `(kept, held_out)`; the held-out part
    /// may be empty only when `fraction` rounds to zero instances, in which
    /// case `held_out` is `None`.
    pub fn split_holdout(&self, fraction: f64, rng: &mut Prng) -> Result<(Dataset, Option<Dataset>)> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::invalid(format!(
                "holdout fraction must be in [0, 1), got {fraction}"
            )));
        }
        let hold = (fraction * self.n as f64).floor() as usize;
        if hold == 0 {
            return Ok((self.clone(), None));
        }
        if hold >= self.n {
            return Err(Error::invalid("holdout would consume the whole dataset"));
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        for i in (1..self.n).rev() {
            order.swap(i, rng.index(i + 1));
        }
        let take = |idx: &[usize]| -> Result<Dataset> {
            let mut f = Vec::with_capacity(idx.len() * self.d_x);
            let mut l = Vec::with_capacity(idx.len() * self.d_y);
            for &i in idx {
                f.extend_from_slice(self.feature_row(i));
                l.extend_from_slice(self.label_row(i));
            }
            Dataset::new(idx.len(), self.d_x, self.d_y, f, l)
        };
        let kept = take(&order[..self.n - hold])?;
        let held = take(&order[self.n - hold..])?;
        Ok((kept, Some(held)))
    }

    pub fn to_table(&self) -> Table {
        let mut headers = Vec::with_capacity(self.d_x + self.d_y);
        for j in 0..self.d_x {
            headers.push(format!("x_{j}"));
        }
        for j in 0..self.d_y {
            headers.push(format!("y_{j}"));
        }
        let mut table = Table::new(headers);
        for i in 0..self.n {
            let mut row = Vec::with_capacity(self.d_x + self.d_y);
            row.extend(self.feature_row(i).iter().map(|&v| format_f64(v)));
            row.extend(self.label_row(i).iter().map(|&v| format_f64(v)));
            table.push_row(row);
        }
        table
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().save(path)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let d_x = table
            .headers
            .iter()
            .take_while(|h| h.starts_with("x_"))
            .count();
        let d_y = table.headers.len() - d_x;
        if d_x == 0 || d_y == 0 || !table.headers[d_x..].iter().all(|h| h.starts_with("y_")) {
            return Err(Error::CsvParse {
                line: 1,
                message: format!(
                    "expected headers x_0..x_{{d_x-1}},y_0..y_{{d_y-1}}, got {:?}",
                    table.headers
                ),
            });
        }
        let n = table.rows.len();
        let mut features = Vec::with_capacity(n * d_x);
        let mut labels = Vec::with_capacity(n * d_y);
        for i in 0..n {
            for j in 0..d_x {
                features.push(table.number(i, j)?);
            }
            for j in 0..d_y {
                labels.push(table.number(i, d_x + j)?);
            }
        }
        Dataset::new(n, d_x, d_y, features, labels)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&Table::load(path)?)
    }
}
