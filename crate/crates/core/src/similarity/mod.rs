//! Domain-similarity metrics: KL and Jensen-Shannon divergence over term
//! distributions (natural log, nats), cosine over dense vectors, and proxy
//! A-distance from a trained domain discriminator.

mod logistic;
mod proxy;

pub use logistic::{fit_logistic, LogisticConfig, LogisticFit};
pub use proxy::{
    distance_from_error, proxy_a_distance, proxy_a_scores, DomainDiscriminator, ProxyDistance,
    ProxyScores,
};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::representations::{DenseRepresentation, TermDistribution};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("need at least {needed} examples per class, have {source_count} source and {target_count} target")]
    InsufficientExamples { needed: usize, source_count: usize, target_count: usize },
    #[error("held-out fraction must lie in (0, 1), got {0}")]
    InvalidHeldout(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    JensenShannon,
    Cosine,
    ProxyA,
}

impl Metric {
    pub fn orientation(self) -> Orientation {
        match self {
            Metric::JensenShannon => Orientation::LowerIsMoreSimilar,
            Metric::Cosine | Metric::ProxyA => Orientation::HigherIsMoreSimilar,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::JensenShannon => "jensen_shannon",
            Metric::Cosine => "cosine",
            Metric::ProxyA => "proxy_a",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jensen_shannon" | "js" => Ok(Metric::JensenShannon),
            "cosine" | "cos" => Ok(Metric::Cosine),
            "proxy_a" | "pad" => Ok(Metric::ProxyA),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherIsMoreSimilar,
    LowerIsMoreSimilar,
}

impl Orientation {
    /// Maps a raw value to a key where larger always means more similar.
    pub fn key(self, value: f64) -> f64 {
        match self {
            Orientation::HigherIsMoreSimilar => value,
            Orientation::LowerIsMoreSimilar => -value,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::HigherIsMoreSimilar => "higher_is_more_similar",
            Orientation::LowerIsMoreSimilar => "lower_is_more_similar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub metric: Metric,
    pub orientation: Orientation,
}

impl SimilarityScore {
    pub fn new(value: f64, metric: Metric) -> Self {
        Self { value, metric, orientation: metric.orientation() }
    }

    /// Larger is more similar, whatever the metric.
    pub fn key(&self) -> f64 {
        self.orientation.key(self.value)
    }
}

/// `sum_{p_i > 0} p_i ln(p_i / q_i)`. Returns `+inf` (with a warning) when
/// `q_i = 0` for some `p_i > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share a vocabulary");
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                log::warn!("KL divergence undefined: q has no mass where p does");
                return f64::INFINITY;
            }
            sum += pi * (pi / qi).ln();
        }
    }
    sum
}

/// Contribution of one coordinate to `KL(P||M) + KL(Q||M)`, symmetric in
/// its arguments bit-for-bit.
#[inline]
fn js_term(p: f64, q: f64) -> f64 {
    let m = 0.5 * (p + q);
    let a = if p > 0.0 { p * (p / m).ln() } else { 0.0 };
    let b = if q > 0.0 { q * (q / m).ln() } else { 0.0 };
    a + b
}

/// Jensen-Shannon divergence in nats, in `[0, ln 2]`. Returns `None` when
/// either distribution is flagged empty.
pub fn js_divergence(p: &TermDistribution, q: &TermDistribution) -> Option<SimilarityScore> {
    if p.is_empty() || q.is_empty() {
        return None;
    }
    Some(SimilarityScore::new(js_divergence_raw(p.probs(), q.probs()), Metric::JensenShannon))
}

/// Jensen-Shannon divergence of two raw probability vectors.
pub fn js_divergence_raw(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share a vocabulary");
    let s: f64 = p.iter().zip(q).map(|(&a, &b)| js_term(a, b)).sum();
    (0.5 * s).max(0.0)
}

/// A dense reference distribution prepared for repeated scoring against
/// sparse candidates.
#[derive(Debug, Clone)]
pub struct JsReference {
    probs: Vec<f64>,
    mass: f64,
}

impl JsReference {
    pub fn new(target: &TermDistribution) -> Self {
        Self { probs: target.probs().to_vec(), mass: target.probs().iter().sum() }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass == 0.0
    }

    /// JS divergence between a sparse distribution `(index, prob)` and the
    /// reference. Coordinates outside the candidate's support each contribute
    /// `q ln 2`, which is folded into one term.
    pub fn divergence<I>(&self, candidate: I) -> f64
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut s = 0.0;
        let mut covered = 0.0;
        for (i, p) in candidate {
            let q = self.probs[i];
            covered += q;
            s += js_term(p, q);
        }
        let uncovered = (self.mass - covered).max(0.0);
        (0.5 * (s + uncovered * std::f64::consts::LN_2)).max(0.0)
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &DenseRepresentation, b: &DenseRepresentation) -> Result<SimilarityScore, SimilarityError> {
    Ok(SimilarityScore::new(cosine_raw(&a.vec, &b.vec)?, Metric::Cosine))
}

pub fn cosine_raw(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimMismatch(a.len(), b.len()));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Writes `id<TAB>metric<TAB>value<TAB>orientation` rows.
pub fn write_scores_tsv<W: Write>(mut out: W, rows: &[(String, SimilarityScore)]) -> std::io::Result<()> {
    writeln!(out, "id\tmetric\tvalue\torientation")?;
    for (id, s) in rows {
        writeln!(out, "{id}\t{}\t{}\t{}", s.metric, s.value, s.orientation.as_str())?;
    }
    Ok(())
}
