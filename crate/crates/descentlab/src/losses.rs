//! Per-instance loss functions and their gradients with respect to the
//! prediction vector.
//!
//! With prediction `p` and true label `y`, both of length `d`:
//!
//! - mean square error: `(1/d) * sum_j (y_j - p_j)^2`
//! - mean absolute error: `(1/d) * sum_j |y_j - p_j|`
//! - hinge: `sum_{j != l} max(0, p_j - p_l + 1)` where `l` is the true class
//!   index; note there is no `1/d` factor.
//! - cross entropy: `-sum_j y_j * ln(p_j)`, natural log.
//!
//! Hinge and cross entropy require one-hot labels; cross entropy requires
//! prediction entries in `[0, 1]` with the true-class entry strictly
//! positive (zeros elsewhere contribute `0 * log` terms, which vanish).
//! MSE and MAE accept arbitrary real labels.

use crate::error::{Error, Result};

/// Which loss to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Mae,
    Hinge,
    CrossEntropy,
}

fn check_lengths(y_hat: &[f64], y: &[f64]) -> Result<()> {
    if y_hat.is_empty() {
        return Err(Error::invalid("loss: prediction vector must be non-empty"));
    }
    if y_hat.len() != y.len() {
        return Err(Error::invalid(format!(
            "loss: length mismatch {} vs {}",
            y_hat.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Index of the single `1.0` entry of a one-hot vector.
fn one_hot_index(y: &[f64]) -> Result<usize> {
    let mut index = None;
    for (j, &v) in y.iter().enumerate() {
        if v == 1.0 {
            if index.is_some() {
                return Err(Error::invalid(format!("label is not one-hot: {y:?}")));
            }
            index = Some(j);
        } else if v != 0.0 {
            return Err(Error::invalid(format!("label is not one-hot: {y:?}")));
        }
    }
    index.ok_or_else(|| Error::invalid(format!("label is not one-hot: {y:?}")))
}

// Contributing entries (true class) must be strictly positive; zeros are
// tolerated elsewhere since their `0 * log` terms vanish.
fn check_ce_domain(y_hat: &[f64], y: &[f64]) -> Result<()> {
    for (j, (&p, &t)) in y_hat.iter().zip(y).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!(
                "cross entropy needs predictions in [0, 1], entry {j} is {p}"
            )));
        }
        if t > 0.0 && p <= 0.0 {
            return Err(Error::domain(format!(
                "cross entropy needs a positive prediction for the true class, entry {j} is {p}"
            )));
        }
    }
    Ok(())
}

/// Scalar loss of one instance.
pub fn loss(kind: LossKind, y_hat: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(y_hat, y)?;
    let d = y_hat.len() as f64;
    match kind {
        LossKind::Mse => Ok(y_hat
            .iter()
            .zip(y)
            .map(|(&p, &t)| (t - p) * (t - p))
            .sum::<f64>()
            / d),
        LossKind::Mae => Ok(y_hat
            .iter()
            .zip(y)
            .map(|(&p, &t)| (t - p).abs())
            .sum::<f64>()
            / d),
        LossKind::Hinge => {
            let l = one_hot_index(y)?;
            Ok(y_hat
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != l)
                .map(|(_, &p)| (p - y_hat[l] + 1.0).max(0.0))
                .sum())
        }
        LossKind::CrossEntropy => {
            let l = one_hot_index(y)?;
            check_ce_domain(y_hat, y)?;
            Ok(-y_hat[l].ln())
        }
    }
}

/// Gradient of [`loss`] with respect to the prediction vector.
///
/// MAE uses subgradient 0 at exact ties; hinge uses the subgradient of each
/// `max` term (0 when the margin is inactive).
pub fn loss_grad(kind: LossKind, y_hat: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_lengths(y_hat, y)?;
    let d = y_hat.len() as f64;
    match kind {
        LossKind::Mse => Ok(y_hat
            .iter()
            .zip(y)
            .map(|(&p, &t)| 2.0 * (p - t) / d)
            .collect()),
        LossKind::Mae => Ok(y_hat
            .iter()
            .zip(y)
            .map(|(&p, &t)| {
                if p > t {
                    1.0 / d
                } else if p < t {
                    -1.0 / d
                } else {
                    0.0
                }
            })
            .collect()),
        LossKind::Hinge => {
            let l = one_hot_index(y)?;
            let mut grad = vec![0.0; y_hat.len()];
            let mut violations = 0.0;
            for (j, &p) in y_hat.iter().enumerate() {
                if j != l && p - y_hat[l] + 1.0 > 0.0 {
                    grad[j] = 1.0;
                    violations += 1.0;
                }
            }
            grad[l] = -violations;
            Ok(grad)
        }
        LossKind::CrossEntropy => {
            one_hot_index(y)?;
            check_ce_domain(y_hat, y)?;
            Ok(y_hat
                .iter()
                .zip(y)
                .map(|(&p, &t)| if t > 0.0 { -t / p } else { 0.0 })
                .collect())
        }
    }
}

/// Total loss of a batch: the sum of per-instance losses.
pub fn batch_loss_sum<'a>(
    kind: LossKind,
    pairs: impl IntoIterator<Item = (&'a [f64], &'a [f64])>,
) -> Result<f64> {
    let mut total = 0.0;
    for (y_hat, y) in pairs {
        total += loss(kind, y_hat, y)?;
    }
    Ok(total)
}

/// Numerically stable softmax followed by cross entropy against a one-hot
/// label. Returns the loss and its gradient with respect to the logits
/// (`softmax(z) - y`). This is the path models use; the standalone
/// [`LossKind::CrossEntropy`] keeps its strict `(0, 1]` domain check.
pub fn softmax_cross_entropy(logits: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_lengths(logits, y)?;
    let l = one_hot_index(y)?;
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum_exp.ln();
    let loss = lse - logits[l];
    let grad = logits
        .iter()
        .zip(y)
        .map(|(&z, &t)| (z - max).exp() / sum_exp - t)
        .collect();
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // The three labelled instances used by every worked-value test below.
    const Y_HAT: [[f64; 3]; 3] = [[0.49, 0.43, 0.08], [0.45, 0.53, 0.02], [0.21, 0.15, 0.64]];
    const Y: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[test]
    fn hinge_worked_values() {
        let expected = [1.53, 1.41, 1.08];
        for i in 0..3 {
            let got = loss(LossKind::Hinge, &Y_HAT[i], &Y[i]).unwrap();
            assert!(
                (got - expected[i]).abs() <= 1e-9,
                "instance {i}: {got} vs {}",
                expected[i]
            );
        }
    }

    #[test]
    fn cross_entropy_worked_values() {
        let printed = [0.713, 0.635, 0.446];
        let exact = [-(0.49f64.ln()), -(0.53f64.ln()), -(0.64f64.ln())];
        for i in 0..3 {
            let got = loss(LossKind::CrossEntropy, &Y_HAT[i], &Y[i]).unwrap();
            assert!((got - printed[i]).abs() <= 5e-4, "instance {i}: {got}");
            assert!((got - exact[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn cross_entropy_of_perfect_prediction_is_zero() {
        let y = [0.0, 1.0, 0.0];
        assert_eq!(loss(LossKind::CrossEntropy, &y, &y).unwrap(), 0.0);
    }

    #[test]
    fn mse_hand_sum() {
        let got = loss(LossKind::Mse, &Y_HAT[0], &Y[0]).unwrap();
        let expected = (0.51f64 * 0.51 + 0.43 * 0.43 + 0.08 * 0.08) / 3.0;
        assert!((got - 0.150467).abs() <= 1e-6);
        assert_eq!(got, expected);
    }

    #[test]
    fn mse_gradient_vanishes_at_label() {
        let y = [0.2, -0.4, 1.1];
        let g = loss_grad(LossKind::Mse, &y, &y).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn cross_entropy_gradient_is_minus_y_over_p() {
        let g = loss_grad(LossKind::CrossEntropy, &[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!(g, vec![-2.0, 0.0]);
    }

    #[test]
    fn hinge_gradient_with_both_margins_violated() {
        let g = loss_grad(LossKind::Hinge, &Y_HAT[0], &Y[0]).unwrap();
        assert_eq!(g, vec![-2.0, 1.0, 1.0]);
    }

    #[test]
    fn mae_uses_zero_subgradient_at_ties() {
        let g = loss_grad(LossKind::Mae, &[1.0, 2.0, 5.0], &[1.0, 3.0, 4.0]).unwrap();
        assert_eq!(g, vec![0.0, -1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn cross_entropy_rejects_out_of_domain_predictions() {
        let y = [1.0, 0.0];
        assert!(matches!(
            loss(LossKind::CrossEntropy, &[0.0, 0.5], &y),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            loss(LossKind::CrossEntropy, &[-0.1, 0.5], &y),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            loss(LossKind::CrossEntropy, &[1.5, 0.5], &y),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hinge_and_ce_reject_non_one_hot_labels() {
        for kind in [LossKind::Hinge, LossKind::CrossEntropy] {
            assert!(matches!(
                loss(kind, &[0.5, 0.5], &[0.5, 0.5]),
                Err(Error::InvalidArgument(_))
            ));
            assert!(matches!(
                loss(kind, &[0.5, 0.5], &[1.0, 1.0]),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn batch_total_is_sum_of_instances() {
        let pairs: Vec<(&[f64], &[f64])> = (0..3).map(|i| (&Y_HAT[i][..], &Y[i][..])).collect();
        let total = batch_loss_sum(LossKind::Hinge, pairs).unwrap();
        let by_hand: f64 = (0..3)
            .map(|i| loss(LossKind::Hinge, &Y_HAT[i], &Y[i]).unwrap())
            .sum();
        assert_eq!(total, by_hand);
    }

    /// Central finite difference of the scalar loss at `y_hat`.
    fn fd_grad(kind: LossKind, y_hat: &[f64], y: &[f64], h: f64) -> Vec<f64> {
        (0..y_hat.len())
            .map(|j| {
                let mut plus = y_hat.to_vec();
                let mut minus = y_hat.to_vec();
                plus[j] += h;
                minus[j] -= h;
                (loss(kind, &plus, y).unwrap() - loss(kind, &minus, y).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn hinge_gradient_matches_finite_differences_away_from_kinks() {
        let fd = fd_grad(LossKind::Hinge, &Y_HAT[0], &Y[0], 1e-6);
        let g = loss_grad(LossKind::Hinge, &Y_HAT[0], &Y[0]).unwrap();
        for j in 0..3 {
            assert!((fd[j] - g[j]).abs() < 1e-6, "coord {j}: {} vs {}", fd[j], g[j]);
        }
    }

    #[test]
    fn softmax_cross_entropy_matches_composed_path() {
        let logits = [1.5, -0.25, 0.75];
        let y = [0.0, 0.0, 1.0];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = logits.iter().map(|z| (z - max).exp()).sum();
        let probs: Vec<f64> = logits.iter().map(|z| (z - max).exp() / denom).collect();
        let (fused, grad) = softmax_cross_entropy(&logits, &y).unwrap();
        let composed = loss(LossKind::CrossEntropy, &probs, &y).unwrap();
        assert!((fused - composed).abs() < 1e-12);
        for j in 0..3 {
            assert!((grad[j] - (probs[j] - y[j])).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_cross_entropy_is_stable_at_large_logits() {
        let logits = [1000.0, 0.0, -1000.0];
        let y = [1.0, 0.0, 0.0];
        let (l, g) = softmax_cross_entropy(&logits, &y).unwrap();
        assert!(l.is_finite() && l >= 0.0);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    proptest! {
        #[test]
        fn losses_are_nonnegative(
            seed_p in proptest::collection::vec(0.01f64..0.99, 2..6),
            label in 0usize..6,
        ) {
            let d = seed_p.len();
            let l = label % d;
            let mut y = vec![0.0; d];
            y[l] = 1.0;
            for kind in [LossKind::Mse, LossKind::Mae, LossKind::Hinge, LossKind::CrossEntropy] {
                let v = loss(kind, &seed_p, &y).unwrap();
                prop_assert!(v >= 0.0, "{kind:?} gave {v}");
            }
        }

        #[test]
        fn gradients_match_finite_differences_off_kinks(
            p in proptest::collection::vec(0.05f64..0.95, 3..5),
            label in 0usize..5,
        ) {
            let d = p.len();
            let l = label % d;
            let mut y = vec![0.0; d];
            y[l] = 1.0;
            let h = 1e-6;
            for kind in [LossKind::Mse, LossKind::Mae, LossKind::Hinge, LossKind::CrossEntropy] {
                // Skip points within 1e-3 of a non-smooth kink for MAE/hinge.
                let near_kink = match kind {
                    LossKind::Mae => p.iter().zip(&y).any(|(&a, &b)| (a - b).abs() < 1e-3),
                    LossKind::Hinge => (0..d).any(|j| j != l && (p[j] - p[l] + 1.0).abs() < 1e-3),
                    _ => false,
                };
                if near_kink {
                    continue;
                }
                let g = loss_grad(kind, &p, &y).unwrap();
                let fd = fd_grad(kind, &p, &y, h);
                for j in 0..d {
                    let denom = fd[j].abs() + g[j].abs() + 1e-12;
                    prop_assert!(
                        (fd[j] - g[j]).abs() / denom < 1e-5,
                        "{kind:?} coord {j}: fd {} vs grad {}",
                        fd[j],
                        g[j]
                    );
                }
            }
        }
    }
}
