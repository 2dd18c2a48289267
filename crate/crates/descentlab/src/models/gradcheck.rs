//! Finite-difference validation of analytic gradients.

use crate::core::ParamVector;
use crate::error::{Error, Result};
use crate::models::{Batch, Objective};

/// Compares the objective's gradient at `theta` against central finite
/// differences with per-coordinate step `h_i = 1e-5 * (1 + |theta_i|)`.
///
/// Returns the worst coordinate's relative error
/// `|fd - grad| / (|fd| + |grad| + 1e-12)`.
pub fn grad_check(obj: &dyn Objective, theta: &ParamVector, batch: Batch<'_>) -> Result<f64> {
    let (_, grad) = obj.eval(theta, batch)?;
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let h = 1e-5 * (1.0 + theta[i].abs());
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus.as_mut_slice()[i] += h;
        minus.as_mut_slice()[i] -= h;
        let f_plus = obj.loss_only(&plus, batch)?;
        let f_minus = obj.loss_only(&minus, batch)?;
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(Error::non_finite("grad_check probe evaluation", i));
        }
        let fd = (f_plus - f_minus) / (2.0 * h);
        let rel = (fd - grad[i]).abs() / (fd.abs() + grad[i].abs() + 1e-12);
        worst = worst.max(rel);
    }
    Ok(worst)
}
