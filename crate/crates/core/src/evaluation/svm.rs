//! One-vs-rest linear SVM trained by averaged SGD on the L2-regularized hinge
//! loss.
//!
//! Per class, the weight vector is stored as `w = a * v` so the
//! regularization shrink is O(1) per step, and the running average of `w` is
//! kept lazily: with `A_t = a_1 + ... + a_t` and sparse increments `d_k` of
//! `v`, the sum of iterates is `A_T v_T - sum_k A_{k-1} d_k`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;
use crate::par;
use crate::rng;
use crate::sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { epochs: 10, learning_rate: 0.1, l2: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<Label>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub dim: usize,
}

impl LinearModel {
    pub fn margins(&self, x: &SparseVec) -> Vec<f64> {
        self.weights.iter().zip(&self.biases).map(|(w, b)| x.dot(w) + b).collect()
    }

    /// Argmax over margins; ties go to the earlier class.
    pub fn predict(&self, x: &SparseVec) -> Label {
        let margins = self.margins(x);
        let mut best = 0;
        for (k, m) in margins.iter().enumerate() {
            if *m > margins[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

/// Step size at global step `t` (1-based).
pub fn step_size(config: &SvmConfig, t: usize) -> f64 {
    config.learning_rate / (1.0 + config.learning_rate * config.l2 * t as f64)
}

/// Per-epoch visiting orders, drawn from one generator.
pub fn epoch_orders(n: usize, epochs: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng::seeded(seed);
    (0..epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect()
}

struct Binary {
    weights: Vec<f64>,
    bias: f64,
}

// Below this scale the lazily averaged state is folded into `done`.
const MIN_SCALE: f64 = 1e-9;

fn train_binary(features: &[SparseVec], y: &[f64], orders: &[Vec<usize>], config: &SvmConfig, dim: usize) -> Binary {
    let mut v = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let mut done = vec![0.0; dim];
    let mut a = 1.0;
    let mut big_a = 0.0;
    let mut b = 0.0;
    let mut b_sum = 0.0;
    let mut t = 0usize;
    for order in orders {
        for &i in order {
            t += 1;
            let x = &features[i];
            let margin = a * x.dot(&v) + b;
            let eta = step_size(config, t);
            a *= 1.0 - eta * config.l2;
            if y[i] * margin < 1.0 {
                let scale = eta * y[i] / a;
                x.add_scaled_to(scale, &mut v);
                x.add_scaled_to(scale * big_a, &mut u);
                b += eta * y[i];
            }
            big_a += a;
            b_sum += b;
            if a < MIN_SCALE {
                for k in 0..dim {
                    done[k] += big_a * v[k] - u[k];
                    v[k] *= a;
                    u[k] = 0.0;
                }
                a = 1.0;
                big_a = 0.0;
            }
        }
    }
    let t = t.max(1) as f64;
    let weights = (0..dim).map(|k| (done[k] + big_a * v[k] - u[k]) / t).collect();
    Binary { weights, bias: b_sum / t }
}

/// Trains one binary classifier per class present in `labels` (classes in
/// label order). A single present class yields a constant predictor.
pub fn train_classifier(
    features: &[SparseVec],
    labels: &[Label],
    config: &SvmConfig,
    seed: u64,
) -> Result<LinearModel, EvalError> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(EvalError::EmptyTraining);
    }
    let dim = features[0].dim();
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() == 1 {
        log::warn!("training set has a single class ({}); using a constant predictor", classes[0]);
        return Ok(LinearModel { classes, weights: vec![vec![0.0; dim]], biases: vec![0.0], dim });
    }
    let orders = epoch_orders(features.len(), config.epochs, seed);
    let fitted = par::map_slice(&classes, |c| {
        let y: Vec<f64> = labels.iter().map(|l| if l == c { 1.0 } else { -1.0 }).collect();
        train_binary(features, &y, &orders, config, dim)
    });
    let (weights, biases) = fitted.into_iter().map(|f| (f.weights, f.bias)).unzip();
    Ok(LinearModel { classes, weights, biases, dim })
}

/// Fraction of argmax-correct predictions.
pub fn evaluate(model: &LinearModel, features: &[SparseVec], labels: &[Label]) -> Result<f64, EvalError> {
    if features.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let correct = par::map_slice(features, |x| model.predict(x))
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / features.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_for_one_class() {
        let xs = vec![SparseVec::from_dense(&[1.0, 0.0]), SparseVec::from_dense(&[0.0, 1.0])];
        let m = train_classifier(&xs, &[Label::Positive; 2], &SvmConfig::default(), 0).unwrap();
        assert_eq!(m.classes, vec![Label::Positive]);
        assert_eq!(m.predict(&xs[1]), Label::Positive);
    }

    #[test]
    fn argmax_ties_go_to_first_class() {
        let m = LinearModel {
            classes: vec![Label::Negative, Label::Positive],
            weights: vec![vec![1.0], vec![1.0]],
            biases: vec![0.0, 0.0],
            dim: 1,
        };
        assert_eq!(m.predict(&SparseVec::from_dense(&[2.0])), Label::Negative);
    }

    #[test]
    fn empty_evaluation_is_an_error() {
        let m = LinearModel { classes: vec![Label::Positive], weights: vec![vec![0.0]], biases: vec![0.0], dim: 1 };
        assert!(matches!(evaluate(&m, &[], &[]), Err(EvalError::EmptyEvaluation)));
    }

    #[test]
    fn step_size_decays() {
        let c = SvmConfig::default();
        assert_eq!(step_size(&c, 0), 0.1);
        assert!(step_size(&c, 1000) < step_size(&c, 10));
    }
}
