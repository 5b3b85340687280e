//! Proxy A-distance: a logistic domain discriminator trained on a balanced
//! source-vs-target sample. Its probability of "target" is the per-example
//! similarity score; its held-out error gives the domain-level distance.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::logistic::{fit_logistic, LogisticConfig, LogisticFit};
use super::SimilarityError;
use crate::rng;
use crate::sparse::Row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDiscriminator {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub seed: u64,
    pub n_source: usize,
    pub n_target: usize,
    pub objective_history: Vec<f64>,
}

impl DomainDiscriminator {
    fn from_fit(fit: LogisticFit, seed: u64, n_source: usize, n_target: usize) -> Self {
        Self {
            weights: fit.weights,
            bias: fit.bias,
            seed,
            n_source,
            n_target,
            objective_history: fit.objective_history,
        }
    }

    /// Probability that `x` belongs to the target domain.
    pub fn score<R: Row + ?Sized>(&self, x: &R) -> f64 {
        crate::autoencoder::sigmoid(x.dot(&self.weights) + self.bias)
    }
}

#[derive(Debug, Clone)]
pub struct ProxyScores {
    /// One score per source example, in input order.
    pub scores: Vec<f64>,
    /// Source positions used for training (ascending).
    pub sampled: Vec<usize>,
    pub discriminator: DomainDiscriminator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyDistance {
    pub distance: f64,
    pub heldout_error: f64,
}

/// `2 (1 - 2 err)` clamped to `[0, 2]`.
pub fn distance_from_error(error: f64) -> f64 {
    (2.0 * (1.0 - 2.0 * error)).clamp(0.0, 2.0)
}

fn balanced_source_sample(n_source: usize, n_target: usize, rng: &mut rng::Rng) -> Vec<usize> {
    if n_source < n_target {
        log::warn!("only {n_source} source examples for {n_target} target examples; using all of them");
        return (0..n_source).collect();
    }
    let mut picked = index::sample(rng, n_source, n_target).into_vec();
    picked.sort_unstable();
    picked
}

fn dim_of<R: Row>(source: &[R], target: &[R]) -> Result<usize, SimilarityError> {
    let dim = source.first().or(target.first()).map(Row::dim).unwrap_or(0);
    for r in source.iter().chain(target) {
        if r.dim() != dim {
            return Err(SimilarityError::DimMismatch(dim, r.dim()));
        }
    }
    Ok(dim)
}

/// Scores every source example by the discriminator's target probability.
pub fn proxy_a_scores<R: Row>(source: &[R], target: &[R], seed: u64) -> Result<ProxyScores, SimilarityError> {
    let dim = dim_of(source, target)?;
    if source.len() < 2 || target.len() < 2 {
        return Err(SimilarityError::InsufficientExamples {
            needed: 2,
            source_count: source.len(),
            target_count: target.len(),
        });
    }
    let mut rng = rng::seeded(seed);
    let sampled = balanced_source_sample(source.len(), target.len(), &mut rng);
    let rows: Vec<&R> = sampled.iter().map(|&i| &source[i]).chain(target.iter()).collect();
    let labels: Vec<f64> = std::iter::repeat_n(0.0, sampled.len())
        .chain(std::iter::repeat_n(1.0, target.len()))
        .collect();
    let fit = fit_logistic(&rows, &labels, dim, &LogisticConfig::default());
    let discriminator = DomainDiscriminator::from_fit(fit, seed, sampled.len(), target.len());
    let scores = crate::par::map_slice(source, |x| discriminator.score(x));
    Ok(ProxyScores { scores, sampled, discriminator })
}

/// Domain-level proxy A-distance from held-out discriminator error.
pub fn proxy_a_distance<R: Row>(
    source: &[R],
    target: &[R],
    heldout_fraction: f64,
    seed: u64,
) -> Result<ProxyDistance, SimilarityError> {
    if !(heldout_fraction > 0.0 && heldout_fraction < 1.0) {
        return Err(SimilarityError::InvalidHeldout(heldout_fraction));
    }
    let dim = dim_of(source, target)?;
    let mut rng = rng::seeded(seed);
    let mut src = balanced_source_sample(source.len(), target.len(), &mut rng);
    let mut tgt: Vec<usize> = (0..target.len()).collect();
    src.shuffle(&mut rng);
    tgt.shuffle(&mut rng);
    let split = |n: usize| ((n as f64 * heldout_fraction).round() as usize).clamp(1, n.saturating_sub(1));
    if src.len() < 2 || tgt.len() < 2 {
        return Err(SimilarityError::InsufficientExamples {
            needed: 2,
            source_count: src.len(),
            target_count: tgt.len(),
        });
    }
    let (src_held, src_train) = src.split_at(split(src.len()));
    let (tgt_held, tgt_train) = tgt.split_at(split(tgt.len()));

    let rows: Vec<&R> =
        src_train.iter().map(|&i| &source[i]).chain(tgt_train.iter().map(|&i| &target[i])).collect();
    let labels: Vec<f64> = std::iter::repeat_n(0.0, src_train.len())
        .chain(std::iter::repeat_n(1.0, tgt_train.len()))
        .collect();
    let fit = fit_logistic(&rows, &labels, dim, &LogisticConfig::default());

    let wrong = src_held.iter().filter(|&&i| fit.predict_proba(&source[i]) >= 0.5).count()
        + tgt_held.iter().filter(|&&i| fit.predict_proba(&target[i]) < 0.5).count();
    let heldout_error = wrong as f64 / (src_held.len() + tgt_held.len()) as f64;
    Ok(ProxyDistance { distance: distance_from_error(heldout_error), heldout_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_error_is_zero_distance() {
        assert_eq!(distance_from_error(0.5), 0.0);
        assert_eq!(distance_from_error(0.0), 2.0);
        assert_eq!(distance_from_error(0.7), 0.0);
    }

    #[test]
    fn too_few_examples_is_an_error() {
        let one = [vec![1.0]];
        assert!(matches!(
            proxy_a_scores(&one, &one, 0),
            Err(SimilarityError::InsufficientExamples { .. })
        ));
    }

    #[test]
    fn small_source_pool_uses_everything() {
        let source = vec![vec![0.0], vec![0.1], vec![0.2]];
        let target = vec![vec![1.0], vec![1.1], vec![1.2], vec![1.3]];
        let s = proxy_a_scores(&source, &target, 4).unwrap();
        assert_eq!(s.sampled, vec![0, 1, 2]);
        assert_eq!(s.scores.len(), 3);
    }

    #[test]
    fn invalid_heldout_fraction() {
        let v = vec![vec![0.0]; 4];
        assert!(matches!(proxy_a_distance(&v, &v, 1.0, 0), Err(SimilarityError::InvalidHeldout(_))));
    }
}
