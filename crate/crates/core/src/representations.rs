//! Term distributions and dense document/domain representations.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoencoder::{AeError, AeModel};
use crate::corpus::{SparseCounts, Vocabulary};
use crate::embeddings::EmbeddingTable;
use crate::sparse::SparseVec;

/// Smoothing factor for SIF weights.
pub const DEFAULT_SIF_SMOOTHING: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum RepresentationError {
    #[error("smoothing factor must be positive, got {0}")]
    InvalidSmoothing(f64),
    #[error("cannot average an empty list of representations")]
    EmptyList,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("cannot average {0:?} and {1:?} representations together")]
    MixedSources(RepresentationSource, RepresentationSource),
    #[error(transparent)]
    Autoencoder(#[from] AeError),
}

/// A probability vector over the shared vocabulary. Built from zero
/// in-vocabulary tokens it is flagged empty and holds all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDistribution {
    probs: Vec<f64>,
    empty: bool,
}

impl TermDistribution {
    /// Wraps a probability vector. A zero vector is flagged empty.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let empty = probs.iter().all(|&p| p == 0.0);
        Self { probs, empty }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }
}

/// Pools the counts of one or more documents and normalizes over `vocab_len`.
pub fn term_distribution<'a, I>(counts: I, vocab_len: usize) -> TermDistribution
where
    I: IntoIterator<Item = &'a SparseCounts>,
{
    let mut acc = vec![0u64; vocab_len];
    for c in counts {
        for &(i, n) in c.pairs() {
            acc[i as usize] += u64::from(n);
        }
    }
    let total: u64 = acc.iter().sum();
    if total == 0 {
        return TermDistribution { probs: vec![0.0; vocab_len], empty: true };
    }
    let total = total as f64;
    TermDistribution { probs: acc.into_iter().map(|c| c as f64 / total).collect(), empty: false }
}

/// Sparse pooled counts of several documents, with the pooled mass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PooledCounts {
    pub pairs: Vec<(u32, u64)>,
    pub mass: u64,
}

impl PooledCounts {
    pub fn pool<'a, I>(members: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseCounts>,
    {
        let mut all: Vec<(u32, u64)> = Vec::new();
        for c in members {
            all.extend(c.pairs().iter().map(|&(i, n)| (i, u64::from(n))));
        }
        all.sort_unstable_by_key(|p| p.0);
        let mut pairs: Vec<(u32, u64)> = Vec::with_capacity(all.len());
        let mut mass = 0;
        for (i, n) in all {
            mass += n;
            match pairs.last_mut() {
                Some(last) if last.0 == i => last.1 += n,
                _ => pairs.push((i, n)),
            }
        }
        Self { pairs, mass }
    }

    pub fn is_empty(&self) -> bool {
        self.mass == 0
    }

    /// The normalized distribution as a sparse vector.
    pub fn to_distribution(&self, vocab_len: usize) -> SparseVec {
        let m = self.mass as f64;
        SparseVec::from_sorted_pairs(vocab_len, self.pairs.iter().map(|&(i, n)| (i, n as f64 / m)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationSource {
    Embedding,
    Autoencoder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRepresentation {
    pub vec: Vec<f64>,
    pub source: RepresentationSource,
}

impl DenseRepresentation {
    pub fn new(vec: Vec<f64>, source: RepresentationSource) -> Self {
        Self { vec, source }
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vec.iter().all(|&x| x == 0.0)
    }
}

/// Unigram probabilities of a reference domain over the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramProbabilities {
    probs: HashMap<String, f64>,
    total: u64,
}

impl UnigramProbabilities {
    /// Pools the counts of the reference domain's documents.
    pub fn from_counts<'a, I>(counts: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = &'a SparseCounts>,
    {
        let pooled = PooledCounts::pool(counts);
        let total = pooled.mass;
        let probs = pooled
            .pairs
            .iter()
            .map(|&(i, n)| (vocab.tokens()[i as usize].clone(), n as f64 / total as f64))
            .collect();
        Self { probs, total }
    }

    pub fn from_map(probs: HashMap<String, f64>, total: u64) -> Self {
        Self { probs, total }
    }

    /// Probability floor for tokens unseen in the reference domain.
    pub fn floor(&self) -> f64 {
        1.0 / (self.total as f64 + 1.0)
    }

    /// `p(w)`, floored for unseen tokens.
    pub fn prob(&self, token: &str) -> f64 {
        match self.probs.get(token) {
            Some(&p) if p > 0.0 => p,
            _ => self.floor(),
        }
    }
}

/// SIF-weighted average of word vectors: each in-table token contributes
/// `sqrt(a / p(w)) * v_w` and the sum is divided by the number of in-table
/// tokens. Tokens without a vector are skipped; no usable token gives the zero
/// vector. Accumulation runs in token-sorted order, so the result does not
/// depend on word order.
pub fn sif_embedding(
    tokens: &[String],
    table: &EmbeddingTable,
    probs: &UnigramProbabilities,
    a: f64,
) -> Result<DenseRepresentation, RepresentationError> {
    if !(a > 0.0) {
        return Err(RepresentationError::InvalidSmoothing(a));
    }
    let mut known: Vec<(&str, &[f64])> =
        tokens.iter().filter_map(|t| table.lookup(t).map(|v| (t.as_str(), v))).collect();
    known.sort_unstable_by(|x, y| x.0.cmp(y.0));
    let mut out = vec![0.0; table.dim()];
    for (tok, v) in &known {
        let w = (a / probs.prob(tok)).sqrt();
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += w * x;
        }
    }
    if !known.is_empty() {
        let n = known.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }
    Ok(DenseRepresentation::new(out, RepresentationSource::Embedding))
}

/// Componentwise mean of document representations.
pub fn domain_representation(
    reps: &[DenseRepresentation],
) -> Result<DenseRepresentation, RepresentationError> {
    let first = reps.first().ok_or(RepresentationError::EmptyList)?;
    let dim = first.dim();
    let mut sum = vec![0.0; dim];
    for r in reps {
        if r.dim() != dim {
            return Err(RepresentationError::DimMismatch { expected: dim, found: r.dim() });
        }
        if r.source != first.source {
            return Err(RepresentationError::MixedSources(first.source, r.source));
        }
        for (s, x) in sum.iter_mut().zip(&r.vec) {
            *s += x;
        }
    }
    let n = reps.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(DenseRepresentation::new(sum, first.source))
}

/// Hidden code of the (uncorrupted) feature vector under a trained autoencoder.
pub fn ae_representation(
    features: &SparseVec,
    model: &AeModel,
) -> Result<DenseRepresentation, RepresentationError> {
    Ok(DenseRepresentation::new(model.encode_sparse(features)?, RepresentationSource::Autoencoder))
}

/// Writes `id<TAB>x1<TAB>x2...` rows for inspection.
pub fn write_representations_tsv<W: Write>(
    mut out: W,
    rows: &[(String, &[f64])],
) -> std::io::Result<()> {
    for (id, vec) in rows {
        write!(out, "{id}")?;
        for x in vec.iter() {
            write!(out, "\t{x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
