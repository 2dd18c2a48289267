//! The evolutionary operators: fitness, parent selection, crossover,
//! mutation, next-generation culling, and the stop test.

use crate::core::{ParamVector, Prng};
use crate::error::{Error, Result};
use crate::gadam::{GenerationReport, MutationResample, UnitModel};

/// Normalized losses and the selection distribution they induce.
#[derive(Clone, Debug)]
pub struct Fitness {
    /// Min-max normalized losses in [0, 1]; infinite losses are forced to 1.
    pub normalized: Vec<f64>,
    /// `exp(-normalized_i) / sum_j exp(-normalized_j)`.
    pub probabilities: Vec<f64>,
}

/// Turns raw validation losses into selection probabilities.
///
/// Finite losses are min-max normalized to [0, 1] (an all-equal population
/// maps to 0.5 everywhere); infinite losses — failed models — are pinned to
/// normalized loss 1. The softmax of the negated normalized losses then
/// cannot overflow regardless of the raw loss scale.
pub fn fitness_probabilities(losses: &[f64]) -> Result<Fitness> {
    if losses.len() < 2 {
        return Err(Error::invalid("fitness: need at least two losses"));
    }
    if losses.iter().any(|l| l.is_nan()) {
        return Err(Error::invalid("fitness: losses must not be NaN"));
    }
    let finite: Vec<f64> = losses.iter().copied().filter(|l| l.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Generation {
            generation: 0,
            message: "every unit model has infinite loss".into(),
        });
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized: Vec<f64> = losses
        .iter()
        .map(|&l| {
            if !l.is_finite() {
                1.0
            } else if hi == lo {
                0.5
            } else {
                (l - lo) / (hi - lo)
            }
        })
        .collect();
    let weights: Vec<f64> = normalized.iter().map(|&n| (-n).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probabilities = weights.into_iter().map(|w| w / total).collect();
    Ok(Fitness {
        normalized,
        probabilities,
    })
}

fn categorical(probs: &[f64], rng: &mut Prng) -> usize {
    let r = rng.uniform();
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if r < cumulative {
            return i;
        }
    }
    probs.len() - 1 // guard against the cumulative sum rounding below 1
}

/// Draws `pairs` ordered parent pairs with replacement (2·pairs independent
/// categorical draws). A model may be paired with itself.
pub fn select_parents(probs: &[f64], pairs: usize, rng: &mut Prng) -> Vec<(usize, usize)> {
    (0..pairs)
        .map(|_| (categorical(probs, rng), categorical(probs, rng)))
        .collect()
}

/// Probability that a child entry comes from parent `i`:
/// `exp(-Li) / (exp(-Li) + exp(-Lj))` over normalized losses. The fitter
/// (lower-loss) parent gets the larger share.
pub fn crossover_threshold(normalized_i: f64, normalized_j: f64) -> f64 {
    let wi = (-normalized_i).exp();
    let wj = (-normalized_j).exp();
    wi / (wi + wj)
}

/// Builds a child parameter vector: entry `m` is inherited from `parent_i`
/// when the per-entry uniform draw is at most the crossover threshold, and
/// from `parent_j` otherwise.
pub fn crossover(parent_i: &UnitModel, parent_j: &UnitModel, rng: &mut Prng) -> Result<ParamVector> {
    if parent_i.theta.len() != parent_j.theta.len() {
        return Err(Error::invalid("crossover: parents have different dimensions"));
    }
    let p = crossover_threshold(parent_i.normalized, parent_j.normalized);
    let values = parent_i
        .theta
        .as_slice()
        .iter()
        .zip(parent_j.theta.as_slice())
        .map(|(&a, &b)| if rng.uniform() <= p { a } else { b })
        .collect();
    ParamVector::new(values)
}

/// Mutation rate for a child of parents with selection probabilities `p_i`
/// and `p_j`: `base * (1 - p_i - p_j)`, floored at zero (self-pairing can
/// push `p_i + p_j` above 1). Always within `[0, base]`.
pub fn mutation_rate(base: f64, prob_i: f64, prob_j: f64) -> f64 {
    (base * (1.0 - prob_i - prob_j)).max(0.0)
}

/// Replaces each entry independently with probability
/// [`mutation_rate`]`(base, prob_i, prob_j)` by a fresh draw from `resample`.
pub fn mutate(
    theta: &ParamVector,
    prob_i: f64,
    prob_j: f64,
    base: f64,
    resample: MutationResample,
    rng: &mut Prng,
) -> Result<ParamVector> {
    if !(0.0..=1.0).contains(&base) {
        return Err(Error::invalid(format!(
            "mutate: base rate must be in [0, 1], got {base}"
        )));
    }
    let rate = mutation_rate(base, prob_i, prob_j);
    let values = theta
        .as_slice()
        .iter()
        .map(|&v| {
            if rng.uniform() <= rate {
                match resample {
                    MutationResample::Uniform01 => rng.uniform(),
                    MutationResample::Normal { sigma } => rng.normal(sigma),
                }
            } else {
                v
            }
        })
        .collect();
    ParamVector::new(values)
}

/// Keeps the `g` lowest-fitness models; ties break by (loss, stable id).
/// Callers set each candidate's `fitness` to its shared-batch score first.
pub fn select_top(mut candidates: Vec<UnitModel>, g: usize) -> Vec<UnitModel> {
    candidates.sort_by(|a, b| a.fitness.total_cmp(&b.fitness).then(a.id.cmp(&b.id)));
    candidates.truncate(g);
    candidates
}

/// Evolution stop test: the generation cap is reached, or the population
/// total loss moved by at most `lambda` between consecutive generations.
pub fn should_stop(
    prev: Option<&GenerationReport>,
    curr: &GenerationReport,
    lambda: f64,
    max_generations: usize,
) -> bool {
    if curr.generation + 1 >= max_generations {
        return true;
    }
    prev.is_some_and(|p| (p.total_loss - curr.total_loss).abs() <= lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: u64, theta: Vec<f64>, normalized: f64) -> UnitModel {
        UnitModel {
            id,
            theta: ParamVector::new(theta).unwrap(),
            fitness: normalized,
            normalized,
            generation: 0,
        }
    }

    #[test]
    fn equal_losses_give_uniform_probabilities() {
        let fit = fitness_probabilities(&[3.2, 3.2, 3.2]).unwrap();
        for &p in &fit.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(fit.normalized.iter().all(|&n| n == 0.5));
    }

    #[test]
    fn extreme_normalized_losses_match_closed_form_softmax() {
        let fit = fitness_probabilities(&[1.0, 2.0]).unwrap();
        assert_eq!(fit.normalized, vec![0.0, 1.0]);
        let e0 = 1.0f64;
        let e1 = (-1.0f64).exp();
        assert!((fit.probabilities[0] - e0 / (e0 + e1)).abs() < 1e-4);
        assert!((fit.probabilities[0] - 0.7311).abs() < 1e-4);
        assert!((fit.probabilities[1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let fit = fitness_probabilities(&[0.3, 9.0, 4.5, f64::INFINITY, 2.2]).unwrap();
        let sum: f64 = fit.probabilities.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-10);
        assert_eq!(fit.normalized[3], 1.0);
    }

    #[test]
    fn shifting_all_losses_leaves_probabilities_unchanged() {
        let a = fitness_probabilities(&[1.0, 2.0, 5.0]).unwrap();
        let b = fitness_probabilities(&[101.0, 102.0, 105.0]).unwrap();
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn all_infinite_is_unrecoverable() {
        let err = fitness_probabilities(&[f64::INFINITY, f64::INFINITY]).unwrap_err();
        assert!(matches!(err, Error::Generation { .. }));
    }

    #[test]
    fn degenerate_distribution_always_selects_first() {
        let mut rng = Prng::new(12);
        let pairs = select_parents(&[1.0, 0.0, 0.0], 8, &mut rng);
        assert_eq!(pairs.len(), 8);
        assert!(pairs.iter().all(|&(i, j)| i == 0 && j == 0));
    }

    #[test]
    fn uniform_selection_frequencies_are_uniform() {
        let mut rng = Prng::new(99);
        let probs = [0.25; 4];
        let mut counts = [0u64; 4];
        let pairs = select_parents(&probs, 50_000, &mut rng);
        for (i, j) in pairs {
            counts[i] += 1;
            counts[j] += 1;
        }
        let total: u64 = counts.iter().sum();
        for &c in &counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 0.25).abs() < 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn crossover_threshold_properties() {
        assert_eq!(crossover_threshold(0.4, 0.4), 0.5);
        // worse parent i => p below one half, but never zero
        let p = crossover_threshold(0.9, 0.1);
        assert!(p > 0.0 && p < 0.5);
    }

    #[test]
    fn identical_parents_produce_identical_child() {
        let a = unit(0, vec![1.0, -2.0, 3.0], 0.2);
        let b = unit(1, vec![1.0, -2.0, 3.0], 0.8);
        let child = crossover(&a, &b, &mut Prng::new(5)).unwrap();
        assert_eq!(child.as_slice(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn crossover_inheritance_is_binomial() {
        let d = 100_000;
        let a = unit(0, vec![1.0; 100_000], 0.2);
        let b = unit(1, vec![2.0; 100_000], 0.7);
        let p = crossover_threshold(0.2, 0.7);
        let child = crossover(&a, &b, &mut Prng::new(123)).unwrap();
        let from_i = child.as_slice().iter().filter(|&&v| v == 1.0).count() as f64;
        let sigma = (d as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (from_i - d as f64 * p).abs() <= 3.0 * sigma,
            "inherited {from_i} of {d}, expected around {}",
            d as f64 * p
        );
    }

    #[test]
    fn zero_base_rate_never_mutates() {
        let theta = ParamVector::new(vec![0.5; 64]).unwrap();
        let out = mutate(&theta, 0.3, 0.3, 0.0, MutationResample::Uniform01, &mut Prng::new(1)).unwrap();
        assert_eq!(out.as_slice(), theta.as_slice());
    }

    #[test]
    fn mutation_rate_formula_and_bounds() {
        assert_eq!(mutation_rate(0.01, 0.25, 0.25), 0.01 * 0.5);
        assert_eq!(mutation_rate(0.01, 0.7, 0.7), 0.0); // self-pairing clamp
        for &(pi, pj) in &[(0.0, 0.0), (0.5, 0.5), (0.9, 0.9)] {
            let r = mutation_rate(0.01, pi, pj);
            assert!((0.0..=0.01).contains(&r));
        }
    }

    #[test]
    fn mutation_count_is_binomial() {
        // Original entries are -1, impossible under Uniform01 resampling, so
        // changed entries are exactly the mutated ones.
        let d = 100_000;
        let theta = ParamVector::new(vec![-1.0; 100_000]).unwrap();
        let out = mutate(&theta, 0.25, 0.25, 0.01, MutationResample::Uniform01, &mut Prng::new(6)).unwrap();
        let rate = mutation_rate(0.01, 0.25, 0.25);
        let changed = out.as_slice().iter().filter(|&&v| v != -1.0).count() as f64;
        let mean = d as f64 * rate;
        let sigma = (d as f64 * rate * (1.0 - rate)).sqrt();
        assert!(
            (changed - mean).abs() <= 3.0 * sigma,
            "changed {changed}, expected around {mean}"
        );
    }

    #[test]
    fn selection_keeps_dominant_side() {
        let parents: Vec<UnitModel> = (0..3).map(|i| {
            let mut m = unit(i, vec![0.0], 0.0);
            m.fitness = 1.0 + i as f64;
            m
        }).collect();
        let children: Vec<UnitModel> = (3..6).map(|i| {
            let mut m = unit(i, vec![0.0], 0.0);
            m.fitness = 10.0 + i as f64;
            m
        }).collect();
        let all: Vec<UnitModel> = parents.iter().cloned().chain(children.iter().cloned()).collect();
        let picked = select_top(all, 3);
        let ids: Vec<u64> = picked.iter().map(|m| m.id).collect();
        assert_eq!(ids, vec![0, 1, 2]); // children all strictly worse

        let all: Vec<UnitModel> = children.iter().cloned().chain(parents.iter().cloned()).collect();
        let picked = select_top(all, 3);
        let ids: Vec<u64> = picked.iter().map(|m| m.id).collect();
        assert_eq!(ids, vec![0, 1, 2]); // order of candidates is irrelevant
    }

    #[test]
    fn selection_matches_brute_force_sort() {
        let mut rng = Prng::new(31);
        let candidates: Vec<UnitModel> = (0..16)
            .map(|i| {
                let mut m = unit(i, vec![0.0], 0.0);
                m.fitness = (rng.uniform() * 10.0).round() / 2.0; // force ties
                m
            })
            .collect();
        let mut oracle: Vec<(f64, u64)> = candidates.iter().map(|m| (m.fitness, m.id)).collect();
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let picked = select_top(candidates, 8);
        let got: Vec<(f64, u64)> = picked.iter().map(|m| (m.fitness, m.id)).collect();
        assert_eq!(got, oracle[..8].to_vec());
    }

    fn report(generation: usize, total: f64) -> GenerationReport {
        GenerationReport {
            generation,
            losses: vec![],
            probabilities: vec![],
            selected_losses: vec![],
            best_id: 0,
            best_loss: 0.0,
            total_loss: total,
            comm_entries: 0,
        }
    }

    #[test]
    fn stop_conditions() {
        // identical totals fire for any positive lambda
        assert!(should_stop(Some(&report(0, 5.0)), &report(1, 5.0), 1e-12, 100));
        // the cap fires regardless of losses
        assert!(should_stop(Some(&report(8, 100.0)), &report(9, 0.0), 1e-12, 10));
        // a large delta does not fire
        assert!(!should_stop(Some(&report(0, 10.0)), &report(1, 9.0), 0.5, 100));
        // the first generation has nothing to compare against
        assert!(!should_stop(None, &report(0, 1.0), 1e9, 100));
    }
}
