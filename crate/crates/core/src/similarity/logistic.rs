//! L2-regularized logistic regression by full-batch gradient descent with
//! backtracking (Armijo) line search.
//!
//! Objective: `sum_i [softplus(z_i) - y_i z_i] + (l2 / 2) ||w||^2` with
//! `z_i = w . x_i + b`; the bias is not regularized.

use serde::{Deserialize, Serialize};

use crate::autoencoder::sigmoid;
use crate::par;
use crate::sparse::Row;

const CHUNK: usize = 256;
const ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { l2: 1.0, tol: 1e-8, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective at the start and after every accepted step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticFit {
    pub fn predict_proba<R: Row + ?Sized>(&self, x: &R) -> f64 {
        sigmoid(x.dot(&self.weights) + self.bias)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

struct Problem<'a, R: Row> {
    rows: &'a [&'a R],
    labels: &'a [f64],
    dim: usize,
    l2: f64,
}

impl<R: Row> Problem<'_, R> {
    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        par::map_slice(self.rows, |x| x.dot(w) + b)
    }

    fn objective(&self, w: &[f64], b: f64) -> f64 {
        let z = self.margins(w, b);
        let data: f64 = z.iter().zip(self.labels).map(|(&z, &y)| softplus(z) - y * z).sum();
        data + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Returns `(grad_w, grad_b)`.
    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let z = self.margins(w, b);
        let resid: Vec<f64> = z.iter().zip(self.labels).map(|(&z, &y)| sigmoid(z) - y).collect();
        let mut g = par::chunked_vec_sum(self.rows.len(), CHUNK, self.dim, |range, acc| {
            for i in range {
                self.rows[i].add_scaled_to(resid[i], acc);
            }
        });
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += self.l2 * wi;
        }
        (g, resid.iter().sum())
    }
}

/// Fits on rows labeled 0/1.
pub fn fit_logistic<R: Row>(rows: &[&R], labels: &[f64], dim: usize, config: &LogisticConfig) -> LogisticFit {
    assert_eq!(rows.len(), labels.len());
    let problem = Problem { rows, labels, dim, l2: config.l2 };
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut f = problem.objective(&w, b);
    let mut history = vec![f];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        let (gw, gb) = problem.gradient(&w, b);
        let gnorm2 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if gnorm2.sqrt() < config.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut t = step;
        let accepted = loop {
            let w_new: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - t * gi).collect();
            let b_new = b - t * gb;
            let f_new = problem.objective(&w_new, b_new);
            if f_new <= f - ARMIJO_C * t * gnorm2 {
                break Some((w_new, b_new, f_new));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((w_new, b_new, f_new)) = accepted else {
            // no descent possible at machine precision
            converged = true;
            break;
        };
        w = w_new;
        b = b_new;
        f = f_new;
        history.push(f);
        step = t * 2.0;
    }
    LogisticFit { weights: w, bias: b, objective_history: history, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_never_increases_and_separates() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let s = if i < 20 { -1.0 } else { 1.0 };
                vec![s + 0.1 * ((i * 7 % 11) as f64 - 5.0) / 5.0, ((i * 3 % 5) as f64) / 5.0]
            })
            .collect();
        let labels: Vec<f64> = (0..40).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let refs: Vec<&Vec<f64>> = rows.iter().collect();
        let fit = fit_logistic(&refs, &labels, 2, &LogisticConfig::default());
        for w in fit.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
        for (x, y) in rows.iter().zip(&labels) {
            assert_eq!((fit.predict_proba(x) > 0.5) as u8 as f64, *y);
        }
    }

    #[test]
    fn balanced_uninformative_data_gives_half() {
        let rows = [vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        let refs: Vec<&Vec<f64>> = rows.iter().collect();
        let fit = fit_logistic(&refs, &[0.0, 1.0, 0.0, 1.0], 1, &LogisticConfig::default());
        assert!(fit.converged);
        assert!((fit.predict_proba(&rows[0]) - 0.5).abs() < 1e-8);
    }
}
