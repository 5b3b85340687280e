//! Training-data selection under five strategies: random, balanced
//! (stratified), domain-level, instance-level and subset-level.
//!
//! Similarity-guided strategies share one abstraction, [`SubsetScorer`],
//! which scores the aggregate representation of any group of pool items
//! against the target. A single item is a group of one and a whole domain is
//! a group of all its members, so all three levels rank with the same code.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, SparseCounts};
use crate::par;
use crate::representations::{PooledCounts, TermDistribution};
use crate::rng;
use crate::similarity::{cosine_raw, DomainDiscriminator, JsReference, Metric, SimilarityScore};
use crate::sparse::SparseVec;

pub const DEFAULT_SUBSET_SIZE: usize = 20;
pub const DEFAULT_SUBSETS_PER_ITERATION: usize = 20_000;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("the selection pool is empty")]
    EmptyPool,
    #[error("invalid selection configuration: {0}")]
    InvalidConfig(String),
    #[error("strategy {0} needs a similarity scorer")]
    MissingScorer(Strategy),
    #[error("proxy_a at the subset level is disabled; set proxy_subset to enable it")]
    ProxySubsetDisabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Balanced,
    Domain,
    Instance,
    Subset,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Balanced => "balanced",
            Strategy::Domain => "domain",
            Strategy::Instance => "instance",
            Strategy::Subset => "subset",
        }
    }

    pub fn is_similarity_guided(self) -> bool {
        matches!(self, Strategy::Domain | Strategy::Instance | Strategy::Subset)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" | "rand" => Ok(Strategy::Random),
            "balanced" | "all" => Ok(Strategy::Balanced),
            "domain" => Ok(Strategy::Domain),
            "instance" | "ex" => Ok(Strategy::Instance),
            "subset" => Ok(Strategy::Subset),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    TermDist,
    Embedding,
    Autoencoder,
}

impl RepresentationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationKind::TermDist => "term_dist",
            RepresentationKind::Embedding => "embedding",
            RepresentationKind::Autoencoder => "autoencoder",
        }
    }

    /// The metric conventionally paired with this representation.
    pub fn default_metric(self) -> Metric {
        match self {
            RepresentationKind::TermDist => Metric::JensenShannon,
            RepresentationKind::Embedding | RepresentationKind::Autoencoder => Metric::Cosine,
        }
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "term_dist" | "term" => Ok(RepresentationKind::TermDist),
            "embedding" | "emb" => Ok(RepresentationKind::Embedding),
            "autoencoder" | "ae" => Ok(RepresentationKind::Autoencoder),
            other => Err(format!("unknown representation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub n: usize,
    pub strategy: Strategy,
    pub representation: RepresentationKind,
    pub metric: Metric,
    pub s: usize,
    pub m: usize,
    pub seed: u64,
    #[serde(default)]
    pub proxy_subset: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            strategy: Strategy::Subset,
            representation: RepresentationKind::TermDist,
            metric: Metric::JensenShannon,
            s: DEFAULT_SUBSET_SIZE,
            m: DEFAULT_SUBSETS_PER_ITERATION,
            seed: 0,
            proxy_subset: false,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.n == 0 {
            return Err(SelectionError::InvalidConfig("n must be at least 1".into()));
        }
        if self.strategy == Strategy::Subset && (self.s == 0 || self.m == 0) {
            return Err(SelectionError::InvalidConfig("s and m must be at least 1".into()));
        }
        if self.strategy == Strategy::Subset && self.metric == Metric::ProxyA && !self.proxy_subset {
            return Err(SelectionError::ProxySubsetDisabled);
        }
        Ok(())
    }
}

/// Candidate training documents: every document outside the target domain.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    ids: Vec<String>,
    domains: Vec<String>,
    corpus_index: Vec<usize>,
}

impl Pool {
    /// Pools the non-target documents of `corpus`, optionally only labeled ones.
    pub fn from_corpus(corpus: &Corpus, target_domain: &str, labeled_only: bool) -> Self {
        let mut pool = Self::default();
        for (i, d) in corpus.documents().iter().enumerate() {
            if d.domain != target_domain && (!labeled_only || d.label.is_some()) {
                pool.ids.push(d.id.clone());
                pool.domains.push(d.domain.clone());
                pool.corpus_index.push(i);
            }
        }
        pool
    }

    pub fn from_items(items: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut pool = Self::default();
        for (i, (id, domain)) in items.into_iter().enumerate() {
            pool.ids.push(id);
            pool.domains.push(domain);
            pool.corpus_index.push(i);
        }
        pool
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn domain(&self, i: usize) -> &str {
        &self.domains[i]
    }

    pub fn corpus_index(&self, i: usize) -> usize {
        self.corpus_index[i]
    }

    /// Pool positions per domain, domains in lexicographic order.
    pub fn by_domain(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, d) in self.domains.iter().enumerate() {
            map.entry(d.as_str()).or_default().push(i);
        }
        map
    }
}

/// Scores groups of pool items (by pool position) against the target.
pub trait SubsetScorer: Sync {
    fn metric(&self) -> Metric;

    /// Raw similarity of the members' aggregate; `None` when the aggregate
    /// carries no usable signal (e.g. an all-OOV term distribution).
    fn score_subset(&self, members: &[usize]) -> Option<f64>;

    fn score_item(&self, item: usize) -> Option<f64> {
        self.score_subset(&[item])
    }

    fn key(&self, raw: f64) -> f64 {
        self.metric().orientation().key(raw)
    }
}

/// Jensen-Shannon divergence of pooled term counts against the target
/// distribution.
pub struct TermJsScorer<'a> {
    counts: &'a [SparseCounts],
    reference: JsReference,
}

impl<'a> TermJsScorer<'a> {
    pub fn new(counts: &'a [SparseCounts], target: &TermDistribution) -> Self {
        Self { counts, reference: JsReference::new(target) }
    }
}

impl SubsetScorer for TermJsScorer<'_> {
    fn metric(&self) -> Metric {
        Metric::JensenShannon
    }

    fn score_subset(&self, members: &[usize]) -> Option<f64> {
        if self.reference.is_empty() {
            return None;
        }
        let pooled = PooledCounts::pool(members.iter().map(|&i| &self.counts[i]));
        if pooled.is_empty() {
            return None;
        }
        let mass = pooled.mass as f64;
        Some(self.reference.divergence(pooled.pairs.iter().map(|&(i, c)| (i as usize, c as f64 / mass))))
    }
}

/// Cosine between the mean of the members' vectors and the target vector.
pub struct DenseCosineScorer<'a> {
    vectors: &'a [Vec<f64>],
    target: Vec<f64>,
}

impl<'a> DenseCosineScorer<'a> {
    pub fn new(vectors: &'a [Vec<f64>], target: Vec<f64>) -> Self {
        Self { vectors, target }
    }
}

fn mean_of(vectors: &[Vec<f64>], members: &[usize], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for &i in members {
        for (a, x) in acc.iter_mut().zip(&vectors[i]) {
            *a += x;
        }
    }
    let n = members.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

impl SubsetScorer for DenseCosineScorer<'_> {
    fn metric(&self) -> Metric {
        Metric::Cosine
    }

    fn score_subset(&self, members: &[usize]) -> Option<f64> {
        let mean = mean_of(self.vectors, members, self.target.len());
        Some(cosine_raw(&mean, &self.target).expect("pool and target vectors share a dimension"))
    }
}

/// Per-item features a proxy discriminator can score.
pub enum ProxyFeatures<'a> {
    Terms { counts: &'a [SparseCounts], vocab_len: usize },
    Dense(&'a [Vec<f64>]),
}

/// Discriminator probability of the members' aggregate representation.
pub struct ProxyScorer<'a> {
    features: ProxyFeatures<'a>,
    discriminator: DomainDiscriminator,
}

impl<'a> ProxyScorer<'a> {
    pub fn new(features: ProxyFeatures<'a>, discriminator: DomainDiscriminator) -> Self {
        Self { features, discriminator }
    }

    pub fn discriminator(&self) -> &DomainDiscriminator {
        &self.discriminator
    }
}

impl SubsetScorer for ProxyScorer<'_> {
    fn metric(&self) -> Metric {
        Metric::ProxyA
    }

    fn score_subset(&self, members: &[usize]) -> Option<f64> {
        match &self.features {
            ProxyFeatures::Terms { counts, vocab_len } => {
                let pooled = PooledCounts::pool(members.iter().map(|&i| &counts[i]));
                let x: SparseVec = pooled.to_distribution(*vocab_len);
                Some(self.discriminator.score(&x))
            }
            ProxyFeatures::Dense(vectors) => {
                let dim = self.discriminator.weights.len();
                Some(self.discriminator.score(&mean_of(vectors, members, dim)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetIteration {
    pub members: Vec<String>,
    pub score: Option<f64>,
    pub candidates: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRanking {
    pub domain: String,
    pub score: Option<SimilarityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub config: SelectionConfig,
    pub chosen: Vec<String>,
    /// Per-chosen-item similarity under the configured metric, when the
    /// strategy computes one.
    pub scores: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub iterations: Vec<SubsetIteration>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub domain_ranking: Vec<DomainRanking>,
    pub chosen_domain: Option<String>,
    /// How many fewer than `n` items were available.
    pub shortfall: usize,
    /// Items excluded because their representation was empty.
    pub excluded_empty: usize,
    #[serde(skip)]
    pub pool_positions: Vec<usize>,
}

impl SelectionResult {
    fn new(config: &SelectionConfig, pool: &Pool, positions: Vec<usize>, scores: Vec<Option<f64>>) -> Self {
        let shortfall = config.n.saturating_sub(positions.len());
        if shortfall > 0 {
            log::warn!("{} selection returned {} of {} requested examples", config.strategy, positions.len(), config.n);
        }
        Self {
            config: config.clone(),
            chosen: positions.iter().map(|&i| pool.id(i).to_owned()).collect(),
            scores,
            iterations: Vec::new(),
            domain_ranking: Vec::new(),
            chosen_domain: None,
            shortfall,
            excluded_empty: 0,
            pool_positions: positions,
        }
    }

    /// Plain id list, one per line.
    pub fn id_list(&self) -> String {
        let mut s = String::new();
        for id in &self.chosen {
            s.push_str(id);
            s.push('\n');
        }
        s
    }
}

/// Runs the configured strategy. Similarity-guided strategies need `scorer`.
pub fn select(
    pool: &Pool,
    config: &SelectionConfig,
    scorer: Option<&dyn SubsetScorer>,
) -> Result<SelectionResult, SelectionError> {
    config.validate()?;
    if pool.is_empty() {
        return Err(SelectionError::EmptyPool);
    }
    let need = || scorer.ok_or(SelectionError::MissingScorer(config.strategy));
    Ok(match config.strategy {
        Strategy::Random => select_random(pool, config),
        Strategy::Balanced => select_balanced(pool, config),
        Strategy::Domain => select_domain_level(pool, need()?, config),
        Strategy::Instance => select_instance_level(pool, need()?, config),
        Strategy::Subset => subset_select(pool, need()?, config),
    })
}

/// Uniform sample without replacement.
pub fn select_random(pool: &Pool, config: &SelectionConfig) -> SelectionResult {
    let mut rng = rng::seeded(config.seed);
    let k = config.n.min(pool.len());
    let picked = index::sample(&mut rng, pool.len(), k).into_vec();
    let scores = vec![None; picked.len()];
    SelectionResult::new(config, pool, picked, scores)
}

/// Per-domain quotas: `n / K` each, the remainder one apiece to the first
/// domains in lexicographic order; domains that run out contribute what they
/// have and the shortfall is redistributed by the same rule.
pub fn balanced_quotas(capacities: &[usize], n: usize) -> Vec<usize> {
    let mut alloc = vec![0; capacities.len()];
    let mut remaining = n;
    loop {
        let active: Vec<usize> = (0..capacities.len()).filter(|&d| alloc[d] < capacities[d]).collect();
        if remaining == 0 || active.is_empty() {
            break;
        }
        let q = remaining / active.len();
        let r = remaining % active.len();
        for (rank, &d) in active.iter().enumerate() {
            let want = q + usize::from(rank < r);
            let give = want.min(capacities[d] - alloc[d]);
            alloc[d] += give;
            remaining -= give;
        }
    }
    alloc
}

/// Stratified sample with equal per-domain quotas.
pub fn select_balanced(pool: &Pool, config: &SelectionConfig) -> SelectionResult {
    let mut rng = rng::seeded(config.seed);
    let domains = pool.by_domain();
    let caps: Vec<usize> = domains.values().map(Vec::len).collect();
    let quotas = balanced_quotas(&caps, config.n);
    let mut picked = Vec::new();
    for (members, &q) in domains.values().zip(&quotas) {
        let idx = index::sample(&mut rng, members.len(), q);
        picked.extend(idx.into_iter().map(|k| members[k]));
    }
    let scores = vec![None; picked.len()];
    SelectionResult::new(config, pool, picked, scores)
}

/// Ranks domains by the similarity of their pooled representation and samples
/// `n` examples uniformly from the best one only. Ties go to the
/// lexicographically first domain.
pub fn select_domain_level(pool: &Pool, scorer: &dyn SubsetScorer, config: &SelectionConfig) -> SelectionResult {
    let domains = pool.by_domain();
    let entries: Vec<(&str, &Vec<usize>)> = domains.iter().map(|(d, m)| (*d, m)).collect();
    let raw = par::map_slice(&entries, |(_, members)| scorer.score_subset(members));
    let mut best: Option<(usize, f64)> = None;
    for (k, r) in raw.iter().enumerate() {
        if let Some(v) = r {
            let key = scorer.key(*v);
            if best.is_none_or(|(_, b)| key > b) {
                best = Some((k, key));
            }
        }
    }
    let ranking: Vec<DomainRanking> = entries
        .iter()
        .zip(&raw)
        .map(|((d, _), r)| DomainRanking {
            domain: (*d).to_owned(),
            score: r.map(|v| SimilarityScore::new(v, scorer.metric())),
        })
        .collect();
    // all domains unscorable: fall back to the first one
    let (winner, _) = best.unwrap_or((0, f64::NEG_INFINITY));
    let (name, members) = entries[winner];
    let mut rng = rng::seeded(config.seed);
    let k = config.n.min(members.len());
    let picked: Vec<usize> = index::sample(&mut rng, members.len(), k).into_iter().map(|i| members[i]).collect();
    let scores = vec![None; picked.len()];
    let mut result = SelectionResult::new(config, pool, picked, scores);
    result.domain_ranking = ranking;
    result.chosen_domain = Some(name.to_owned());
    result
}

/// Orders positions by descending similarity key, ties by ascending id.
fn rank_items(pool: &Pool, scorer: &dyn SubsetScorer, items: &mut [(usize, f64)]) {
    items.sort_by(|a, b| {
        scorer
            .key(b.1)
            .total_cmp(&scorer.key(a.1))
            .then_with(|| pool.id(a.0).cmp(pool.id(b.0)))
    });
}

/// Scores every item on its own and keeps the `n` most similar.
pub fn select_instance_level(pool: &Pool, scorer: &dyn SubsetScorer, config: &SelectionConfig) -> SelectionResult {
    let raw = par::map_range(pool.len(), |i| scorer.score_item(i));
    let mut scored: Vec<(usize, f64)> = raw.iter().enumerate().filter_map(|(i, s)| s.map(|v| (i, v))).collect();
    let excluded = pool.len() - scored.len();
    rank_items(pool, scorer, &mut scored);
    scored.truncate(config.n);
    let positions = scored.iter().map(|p| p.0).collect();
    let scores = scored.iter().map(|p| Some(p.1)).collect();
    let mut result = SelectionResult::new(config, pool, positions, scores);
    result.excluded_empty = excluded;
    result
}

/// `C(n, k) <= limit`, without overflow.
fn combinations_at_most(n: usize, k: usize, limit: usize) -> bool {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > limit as u128 {
            return false;
        }
    }
    c <= limit as u128
}

/// All `k`-combinations of `0..n` in lexicographic order.
fn all_combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Iterative subset-level selection.
///
/// Each round draws `m` subsets of size `min(s, remaining)` from the
/// remaining pool (uniform without replacement inside a subset, independent
/// across subsets), scores each subset's aggregate against the target and
/// keeps the best (first drawn wins ties). Kept members leave the pool. The
/// number of rounds is `ceil(n / s)`; the last kept subset is trimmed to hit
/// exactly `n`, keeping its most similar members.
///
/// The remaining pool is kept in id order. When it has at most `m` distinct
/// subsets of the round's size, every subset is scored once instead, in
/// lexicographic order.
///
/// Candidates are drawn up front from the seeded generator and then scored in
/// parallel, so the result is identical to sequential execution.
pub fn subset_select(pool: &Pool, scorer: &dyn SubsetScorer, config: &SelectionConfig) -> SelectionResult {
    let mut rng = rng::seeded(config.seed);
    let target_n = config.n.min(pool.len());
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    remaining.sort_by(|&a, &b| pool.id(a).cmp(pool.id(b)));

    let mut positions = Vec::with_capacity(target_n);
    let mut item_scores = Vec::with_capacity(target_n);
    let mut iterations = Vec::new();

    while positions.len() < target_n {
        let size = config.s.min(remaining.len());
        let exhaustive = combinations_at_most(remaining.len(), size, config.m);
        let candidates: Vec<Vec<usize>> = if exhaustive {
            all_combinations(remaining.len(), size)
        } else {
            (0..config.m)
                .map(|_| {
                    let mut c = index::sample(&mut rng, remaining.len(), size).into_vec();
                    c.sort_unstable();
                    c
                })
                .collect()
        };
        let members_of = |c: &[usize]| c.iter().map(|&p| remaining[p]).collect::<Vec<_>>();
        let scores = par::map_slice(&candidates, |c| scorer.score_subset(&members_of(c)));

        let mut best: Option<(usize, f64)> = None;
        for (k, s) in scores.iter().enumerate() {
            if let Some(v) = s {
                let key = scorer.key(*v);
                if best.is_none_or(|(_, b)| key > b) {
                    best = Some((k, key));
                }
            }
        }
        let winner = best.map_or(0, |b| b.0);
        let mut members = members_of(&candidates[winner]);

        let need = target_n - positions.len();
        let mut per_item: Vec<(usize, Option<f64>)> = members.iter().map(|&i| (i, scorer.score_item(i))).collect();
        if members.len() > need {
            per_item.sort_by(|a, b| {
                let ka = a.1.map_or(f64::NEG_INFINITY, |v| scorer.key(v));
                let kb = b.1.map_or(f64::NEG_INFINITY, |v| scorer.key(v));
                kb.total_cmp(&ka).then_with(|| pool.id(a.0).cmp(pool.id(b.0)))
            });
            per_item.truncate(need);
            members = per_item.iter().map(|p| p.0).collect();
        }

        iterations.push(SubsetIteration {
            members: members.iter().map(|&i| pool.id(i).to_owned()).collect(),
            score: scores[winner],
            candidates: candidates.len(),
            exhaustive,
        });
        let taken: std::collections::HashSet<usize> = members.iter().copied().collect();
        remaining.retain(|i| !taken.contains(i));
        positions.extend(per_item.iter().map(|p| p.0));
        item_scores.extend(per_item.iter().map(|p| p.1));
    }

    let mut result = SelectionResult::new(config, pool, positions, item_scores);
    result.iterations = iterations;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool_with(domains: &[(&str, usize)]) -> Pool {
        Pool::from_items(domains.iter().flat_map(|(d, n)| (0..*n).map(move |i| (format!("{d}-{i:04}"), d.to_string()))))
    }

    fn cfg(strategy: Strategy, n: usize, seed: u64) -> SelectionConfig {
        SelectionConfig { n, strategy, seed, ..Default::default() }
    }

    #[test]
    fn quotas_even_split_remainder_and_shortfall() {
        assert_eq!(balanced_quotas(&[100, 100, 100, 100], 40), vec![10, 10, 10, 10]);
        assert_eq!(balanced_quotas(&[100, 100, 100], 10), vec![4, 3, 3]);
        assert_eq!(balanced_quotas(&[3, 100], 10), vec![3, 7]);
        assert_eq!(balanced_quotas(&[2, 1], 10), vec![2, 1]);
    }

    #[test]
    fn balanced_draws_quotas_from_each_domain() {
        let pool = pool_with(&[("a", 3), ("b", 50)]);
        let r = select_balanced(&pool, &cfg(Strategy::Balanced, 10, 1));
        let from_a = r.chosen.iter().filter(|id| id.starts_with("a-")).count();
        assert_eq!((from_a, r.chosen.len()), (3, 10));
    }

    #[test]
    fn random_exhausts_small_pool_and_is_deterministic() {
        let pool = pool_with(&[("a", 5)]);
        let r = select_random(&pool, &cfg(Strategy::Random, 5, 3));
        let mut ids = r.chosen.clone();
        ids.sort();
        assert_eq!(ids, (0..5).map(|i| format!("a-{i:04}")).collect::<Vec<_>>());
        assert_eq!(r, select_random(&pool, &cfg(Strategy::Random, 5, 3)));
        let r = select_random(&pool, &cfg(Strategy::Random, 8, 3));
        assert_eq!(r.shortfall, 3);
    }

    #[test]
    fn combination_enumeration() {
        assert_eq!(all_combinations(4, 2).len(), 6);
        assert_eq!(all_combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(all_combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert!(combinations_at_most(10, 3, 120));
        assert!(!combinations_at_most(10, 3, 119));
        assert!(!combinations_at_most(1000, 20, 20_000));
    }

    struct Fixed(Vec<f64>);
    impl SubsetScorer for Fixed {
        fn metric(&self) -> Metric {
            Metric::Cosine
        }
        fn score_subset(&self, members: &[usize]) -> Option<f64> {
            Some(members.iter().map(|&i| self.0[i]).sum::<f64>() / members.len() as f64)
        }
    }

    #[test]
    fn instance_level_sorts_with_id_tiebreak() {
        let pool = pool_with(&[("a", 4)]);
        let scorer = Fixed(vec![0.5, 0.9, 0.5, 0.1]);
        let r = select_instance_level(&pool, &scorer, &cfg(Strategy::Instance, 3, 0));
        assert_eq!(r.chosen, vec!["a-0001", "a-0000", "a-0002"]);
    }

    #[test]
    fn domain_level_ties_go_lexicographic() {
        let pool = pool_with(&[("b", 5), ("a", 5)]);
        let scorer = Fixed(vec![0.3; 10]);
        let r = select_domain_level(&pool, &scorer, &cfg(Strategy::Domain, 3, 0));
        assert_eq!(r.chosen_domain.as_deref(), Some("a"));
        assert!(r.chosen.iter().all(|id| id.starts_with("a-")));
    }

    #[test]
    fn domain_level_does_not_spill_over() {
        let pool = pool_with(&[("a", 4), ("b", 20)]);
        let scorer = Fixed((0..24).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect());
        let r = select_domain_level(&pool, &scorer, &cfg(Strategy::Domain, 10, 0));
        assert_eq!((r.chosen.len(), r.shortfall), (4, 6));
    }

    #[test]
    fn subset_single_round_is_best_candidate() {
        let pool = pool_with(&[("a", 30)]);
        let scorer = Fixed((0..30).map(|i| (i as f64 * 0.37).sin()).collect());
        let config = SelectionConfig { n: 5, s: 5, m: 50, strategy: Strategy::Subset, seed: 9, ..Default::default() };
        let r = subset_select(&pool, &scorer, &config);
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.chosen.len(), 5);
        assert!(!r.iterations[0].exhaustive);
    }

    #[test]
    fn subset_truncates_last_round_to_exact_n() {
        let pool = pool_with(&[("a", 40)]);
        let scorer = Fixed((0..40).map(|i| i as f64).collect());
        let config = SelectionConfig { n: 13, s: 5, m: 20, strategy: Strategy::Subset, seed: 2, ..Default::default() };
        let r = subset_select(&pool, &scorer, &config);
        assert_eq!(r.iterations.len(), 3);
        assert_eq!(r.chosen.len(), 13);
        assert_eq!(r.iterations[2].members.len(), 3);
    }

    #[test]
    fn proxy_subset_requires_flag() {
        let config = SelectionConfig { metric: Metric::ProxyA, ..Default::default() };
        assert!(matches!(config.validate(), Err(SelectionError::ProxySubsetDisabled)));
        assert!(SelectionConfig { proxy_subset: true, ..config }.validate().is_ok());
    }

    #[test]
    fn guided_strategy_without_scorer_errors() {
        let pool = pool_with(&[("a", 3)]);
        assert!(matches!(
            select(&pool, &cfg(Strategy::Instance, 2, 0), None),
            Err(SelectionError::MissingScorer(Strategy::Instance))
        ));
    }
}
