//! Seeded generator of multi-domain sentiment corpora with controlled domain
//! shift.
//!
//! Every domain owns a topical pool and one sentiment lexicon per label; all
//! domains also share a topical pool. A source document borrows sentiment
//! words from the target's lexicon (and topical words from the target's pool)
//! with probability equal to its domain's overlap, so both its usefulness for
//! the target and its distributional similarity to the target grow with the
//! overlap.

use std::collections::BTreeSet;

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Document, Label, Task};
use crate::par;
use crate::rng::{self, stream};

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("duplicate domain name {0:?}")]
    DuplicateName(String),
    #[error("invalid domain spec {name:?}: {message}")]
    InvalidSpec { name: String, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    /// Lowercase letters, digits and underscores; prefixes the domain's tokens.
    pub name: String,
    pub shared_vocab_size: usize,
    pub private_vocab_size: usize,
    /// Words per label in the domain's sentiment lexicon.
    pub lexicon_size: usize,
    /// Probability of borrowing a word from the target instead of the domain.
    pub overlap: f64,
    /// Per-document overlap is uniform in `overlap ± overlap_spread`.
    pub overlap_spread: f64,
    /// Probability of a topical word from another source domain's pool.
    pub topic_mixing: f64,
    /// Probability that a topical word comes from the shared pool.
    pub shared_rate: f64,
    /// Probability that a word is a sentiment word.
    pub sentiment_rate: f64,
    /// Per-document sentiment rate is uniform in
    /// `sentiment_rate ± sentiment_spread`.
    pub sentiment_spread: f64,
    /// Topical pools and lexicons are split into this many sub-topics of
    /// breadth proportional to 1, 2, ..., K; a document stays in one
    /// sub-topic, chosen uniformly.
    pub subtopics: usize,
    /// Zipf exponent of word frequencies inside every pool (0 = uniform).
    pub zipf_exponent: f64,
    pub docs_per_label: usize,
    pub doc_len_min: usize,
    pub doc_len_max: usize,
    pub label_noise: f64,
    pub task: Task,
    pub seed: u64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            name: "domain".into(),
            shared_vocab_size: 200,
            private_vocab_size: 300,
            lexicon_size: 60,
            overlap: 0.0,
            overlap_spread: 0.0,
            topic_mixing: 0.0,
            shared_rate: 0.3,
            sentiment_rate: 0.1,
            sentiment_spread: 0.0,
            subtopics: 1,
            zipf_exponent: 0.0,
            docs_per_label: 500,
            doc_len_min: 8,
            doc_len_max: 20,
            label_noise: 0.0,
            task: Task::Ternary,
            seed: 0,
        }
    }
}

impl DomainSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: &str| Err(SyntheticError::InvalidSpec { name: self.name.clone(), message: m.to_owned() });
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            return bad("name must be non-empty lowercase letters, digits or underscores");
        }
        if self.shared_vocab_size == 0 || self.private_vocab_size == 0 || self.lexicon_size == 0 {
            return bad("vocabulary and lexicon sizes must be at least 1");
        }
        let tri = self.subtopics * (self.subtopics + 1) / 2;
        if self.subtopics == 0 || self.private_vocab_size < tri || self.lexicon_size < tri {
            return bad("subtopics must be at least 1 and pools need K(K+1)/2 words");
        }
        if self.docs_per_label == 0 {
            return bad("docs_per_label must be at least 1");
        }
        if self.doc_len_min == 0 || self.doc_len_min > self.doc_len_max {
            return bad("document lengths need 1 <= doc_len_min <= doc_len_max");
        }
        if !(unit(self.overlap) && unit(self.topic_mixing) && unit(self.shared_rate) && unit(self.sentiment_rate)) {
            return bad("overlap, topic_mixing, shared_rate and sentiment_rate must lie in [0, 1]");
        }
        if !(unit(self.overlap_spread) && unit(self.sentiment_spread)) {
            return bad("overlap_spread and sentiment_spread must lie in [0, 1]");
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return bad("zipf_exponent must be finite and non-negative");
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad("label_noise must lie in [0, 0.5)");
        }
        Ok(())
    }
}

fn label_tag(label: Label) -> &'static str {
    match label {
        Label::Negative => "neg",
        Label::Neutral => "neu",
        Label::Positive => "pos",
    }
}

pub fn shared_token(k: usize) -> String {
    format!("shared_{k}")
}

pub fn topic_token(domain: &str, k: usize) -> String {
    format!("{domain}_topic_{k}")
}

pub fn sentiment_token(domain: &str, label: Label, k: usize) -> String {
    format!("{domain}_{}_{k}", label_tag(label))
}

/// Draws ranks `0..n` uniformly or with Zipfian weights `1 / (k + 1)^s`.
struct RankSampler {
    exponent: f64,
    tables: HashMap<usize, WeightedIndex<f64>>,
}

impl RankSampler {
    fn new(exponent: f64) -> Self {
        Self { exponent, tables: HashMap::new() }
    }

    fn draw(&mut self, n: usize, rng: &mut rng::Rng) -> usize {
        if self.exponent == 0.0 {
            return rng.gen_range(0..n);
        }
        let s = self.exponent;
        let table = self.tables.entry(n).or_insert_with(|| {
            WeightedIndex::new((0..n).map(|k| (k as f64 + 1.0).powf(-s))).expect("non-empty positive weights")
        });
        table.sample(rng)
    }

    fn draw_in(&mut self, range: std::ops::Range<usize>, rng: &mut rng::Rng) -> usize {
        range.start + self.draw(range.len(), rng)
    }
}

/// Half-open index range of sub-topic `k` among `parts` in a pool of `n`.
pub fn subtopic_range(n: usize, parts: usize, k: usize) -> std::ops::Range<usize> {
    let tri = |i: usize| i * (i + 1) / 2;
    let total = tri(parts);
    (n * tri(k) / total)..(n * tri(k + 1) / total)
}

/// Who a document generator borrows from.
struct Context<'a> {
    target: &'a DomainSpec,
    others: Vec<&'a DomainSpec>,
}

fn generate_domain(spec: &DomainSpec, ctx: &Context<'_>, is_target: bool) -> Vec<Document> {
    let mut rng = rng::stream_rng(rng::derive_seed(spec.seed, &spec.name), stream::GENERATOR);
    let labels = spec.task.labels();
    let total = spec.docs_per_label * labels.len();
    let mut ranks = RankSampler::new(spec.zipf_exponent);
    let mut docs = Vec::with_capacity(total);
    for k in 0..total {
        let true_label = labels[k % labels.len()];
        let overlap = if is_target {
            1.0
        } else {
            let lo = (spec.overlap - spec.overlap_spread).max(0.0);
            let hi = (spec.overlap + spec.overlap_spread).min(1.0);
            if hi > lo { rng.gen_range(lo..=hi) } else { lo }
        };
        let sentiment_rate = if spec.sentiment_spread > 0.0 {
            let lo = (spec.sentiment_rate - spec.sentiment_spread).max(0.0);
            let hi = (spec.sentiment_rate + spec.sentiment_spread).min(1.0);
            rng.gen_range(lo..=hi)
        } else {
            spec.sentiment_rate
        };
        let topic = rng.gen_range(0..spec.subtopics);
        let slice = |d: &DomainSpec, n: usize| subtopic_range(n, d.subtopics, topic % d.subtopics);
        let len = rng.gen_range(spec.doc_len_min..=spec.doc_len_max);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let borrow = rng.gen::<f64>() < overlap;
            if rng.gen::<f64>() < sentiment_rate {
                let lex = if borrow { ctx.target } else { spec };
                let j = ranks.draw_in(slice(lex, lex.lexicon_size), &mut rng);
                words.push(sentiment_token(&lex.name, true_label, j));
            } else if borrow {
                let j = ranks.draw_in(slice(ctx.target, ctx.target.private_vocab_size), &mut rng);
                words.push(topic_token(&ctx.target.name, j));
            } else if !ctx.others.is_empty() && rng.gen::<f64>() < spec.topic_mixing {
                let other = ctx.others[rng.gen_range(0..ctx.others.len())];
                let j = ranks.draw_in(slice(other, other.private_vocab_size), &mut rng);
                words.push(topic_token(&other.name, j));
            } else if rng.gen::<f64>() < spec.shared_rate {
                words.push(shared_token(ranks.draw(spec.shared_vocab_size, &mut rng)));
            } else {
                let j = ranks.draw_in(slice(spec, spec.private_vocab_size), &mut rng);
                words.push(topic_token(&spec.name, j));
            }
        }
        let label = if rng.gen::<f64>() < spec.label_noise {
            let others: Vec<Label> = labels.iter().copied().filter(|&l| l != true_label).collect();
            others[rng.gen_range(0..others.len())]
        } else {
            true_label
        };
        docs.push(Document {
            id: format!("{}-{k:05}", spec.name),
            text: words.join(" "),
            domain: spec.name.clone(),
            label: Some(label),
        });
    }
    docs
}

/// Generates the source domains and the target domain into one corpus
/// (sources first, in the given order, then the target).
pub fn generate(specs: &[DomainSpec], target: &DomainSpec) -> Result<Corpus, SyntheticError> {
    let mut names = BTreeSet::new();
    for s in specs.iter().chain(std::iter::once(target)) {
        s.validate()?;
        if !names.insert(s.name.as_str()) {
            return Err(SyntheticError::DuplicateName(s.name.clone()));
        }
    }
    let mut all: Vec<(&DomainSpec, bool)> = specs.iter().map(|s| (s, false)).collect();
    all.push((target, true));
    let parts = par::map_slice(&all, |&(spec, is_target)| {
        let others = specs.iter().filter(|o| o.name != spec.name).collect();
        generate_domain(spec, &Context { target, others }, is_target)
    });
    Ok(Corpus::new(parts.into_iter().flatten().collect())?)
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub target: String,
    pub sources: Vec<DomainSpec>,
    pub target_spec: DomainSpec,
    pub corpus: Corpus,
}

pub const GRADED_OVERLAPS: [f64; 5] = [0.9, 0.6, 0.4, 0.2, 0.0];

/// Specs of the graded scenario: five distinct sources whose lexicon overlap
/// with the target is 0.9, 0.6, 0.4, 0.2 and 0.0.
pub fn graded_specs(seed: u64) -> (Vec<DomainSpec>, DomainSpec) {
    let sources = GRADED_OVERLAPS
        .iter()
        .map(|&o| DomainSpec {
            name: format!("overlap_{:02}", (o * 10.0).round() as u32),
            overlap: o,
            label_noise: 0.05,
            seed,
            ..DomainSpec::default()
        })
        .collect();
    let target = DomainSpec { name: "target".into(), seed, ..DomainSpec::default() };
    (sources, target)
}

/// Specs of the blended scenario: eight sources with heavy topical mixing and
/// widely varying per-document overlap, so domain boundaries carry little
/// information. Every domain has five sub-topics of unequal breadth with
/// their own sentiment words; narrow sub-topics concentrate probability mass
/// on few words.
pub fn blended_specs(seed: u64) -> (Vec<DomainSpec>, DomainSpec) {
    let overlaps = [0.55, 0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2];
    let sources = overlaps
        .iter()
        .enumerate()
        .map(|(i, &o)| DomainSpec {
            name: format!("blend_{}", i + 1),
            overlap: o,
            overlap_spread: 0.35,
            topic_mixing: 0.6,
            subtopics: 5,
            docs_per_label: 300,
            label_noise: 0.05,
            seed,
            ..DomainSpec::default()
        })
        .collect();
    let target = DomainSpec { name: "target".into(), docs_per_label: 300, subtopics: 5, seed, ..DomainSpec::default() };
    (sources, target)
}

/// The fixed catalog: `graded` (scenario a) and `blended` (scenario b).
pub fn benchmark_suite(seed: u64) -> Result<Vec<Scenario>, SyntheticError> {
    [("graded", graded_specs(seed)), ("blended", blended_specs(seed))]
        .into_iter()
        .map(|(name, (sources, target_spec))| {
            let corpus = generate(&sources, &target_spec)?;
            Ok(Scenario { name: name.into(), target: target_spec.name.clone(), sources, target_spec, corpus })
        })
        .collect()
}
