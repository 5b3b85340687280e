use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{mean, sample_std};
use super::svm::{evaluate, train_classifier, SvmConfig};
use super::EvalError;
use crate::autoencoder::{self, AeTrainConfig, TrainedAutoencoder};
use crate::corpus::{preprocess, term_counts, Corpus, Label, PreprocessOptions};
use crate::corpus::{SparseCounts, TfidfVectorizer, Vocabulary};
use crate::embeddings::EmbeddingTable;
use crate::par;
use crate::representations::{self, term_distribution, TermDistribution, UnigramProbabilities};
use crate::rng::{self, stream};
use crate::selection::{
    select, DenseCosineScorer, Pool, ProxyFeatures, ProxyScorer, RepresentationKind, SelectionConfig, SubsetScorer,
    TermJsScorer,
};
use crate::similarity::{proxy_a_scores, Metric};
use crate::sparse::SparseVec;

#[derive(Debug, Clone)]
pub struct FeatureOptions {
    pub vocab_size: usize,
    pub preprocess: PreprocessOptions,
    pub sif_a: f64,
    pub autoencoder: AeTrainConfig,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            vocab_size: 10_000,
            preprocess: PreprocessOptions::default(),
            sif_a: representations::DEFAULT_SIF_SMOOTHING,
            autoencoder: AeTrainConfig::default(),
        }
    }
}

/// Corpus-wide preprocessing shared by every target and run: tokens,
/// vocabulary, term counts and the requested dense document representations.
pub struct CorpusFeatures<'c> {
    pub corpus: &'c Corpus,
    pub tokens: Vec<Vec<String>>,
    pub vocab: Vocabulary,
    pub counts: Vec<SparseCounts>,
    pub embedding: Option<Vec<Vec<f64>>>,
    pub autoencoder: Option<(TrainedAutoencoder, Vec<Vec<f64>>)>,
}

impl<'c> CorpusFeatures<'c> {
    /// Tokens, vocabulary and term counts; dense representations are added
    /// with [`Self::with_embeddings`] and [`Self::with_autoencoder`].
    pub fn new(corpus: &'c Corpus, options: &FeatureOptions) -> Self {
        let tokens = par::map_slice(corpus.documents(), |d| preprocess(&d.text, &options.preprocess));
        let vocab = Vocabulary::from_token_lists(tokens.iter(), options.vocab_size);
        let counts = par::map_slice(&tokens, |t| term_counts(t, &vocab));
        Self { corpus, tokens, vocab, counts, embedding: None, autoencoder: None }
    }

    /// Convenience wrapper over the three stages.
    pub fn build(
        corpus: &'c Corpus,
        options: &FeatureOptions,
        embeddings: Option<&EmbeddingTable>,
        train_autoencoder: bool,
    ) -> Result<Self, EvalError> {
        let mut features = Self::new(corpus, options);
        if let Some(table) = embeddings {
            features.with_embeddings(table, options.sif_a)?;
        }
        if train_autoencoder {
            features.with_autoencoder(&options.autoencoder)?;
        }
        Ok(features)
    }

    pub fn with_embeddings(&mut self, table: &EmbeddingTable, sif_a: f64) -> Result<(), EvalError> {
        self.embedding = Some(self.sif_vectors(table, sif_a)?);
        Ok(())
    }

    /// Trains the autoencoder on every document, target included.
    pub fn with_autoencoder(&mut self, config: &AeTrainConfig) -> Result<(), EvalError> {
        self.autoencoder = Some(self.train_autoencoder(config)?);
        Ok(())
    }

    /// SIF vectors with `p(w)` estimated on each document's own domain.
    fn sif_vectors(&self, table: &EmbeddingTable, a: f64) -> Result<Vec<Vec<f64>>, EvalError> {
        let probs: BTreeMap<&str, UnigramProbabilities> = self
            .corpus
            .domains()
            .iter()
            .map(|d| {
                let members = self.corpus.domain_indices(d);
                (d.as_str(), UnigramProbabilities::from_counts(members.iter().map(|&i| &self.counts[i]), &self.vocab))
            })
            .collect();
        let docs = self.corpus.documents();
        par::map_range(docs.len(), |i| {
            representations::sif_embedding(&self.tokens[i], table, &probs[docs[i].domain.as_str()], a).map(|r| r.vec)
        })
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(Into::into)
    }

    fn train_autoencoder(&self, config: &AeTrainConfig) -> Result<(TrainedAutoencoder, Vec<Vec<f64>>), EvalError> {
        let tfidf = TfidfVectorizer::fit_with_vocabulary(self.tokens.iter().map(Vec::as_slice), &self.vocab)?;
        let inputs = par::map_slice(&self.tokens, |t| tfidf.transform(t));
        let trained = autoencoder::train(&inputs, config)?;
        let codes = par::map_slice(&inputs, |x| trained.model.encode_sparse(x))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        Ok((trained, codes))
    }

    pub fn dense(&self, kind: RepresentationKind) -> Result<&[Vec<f64>], EvalError> {
        match kind {
            RepresentationKind::TermDist => Err(EvalError::MissingRepresentation(kind)),
            RepresentationKind::Embedding => self.embedding.as_deref().ok_or(EvalError::MissingEmbeddings),
            RepresentationKind::Autoencoder => {
                self.autoencoder.as_ref().map(|a| a.1.as_slice()).ok_or(EvalError::MissingRepresentation(kind))
            }
        }
    }

    /// The selection pool and target statistics for one target domain.
    pub fn target_view(&self, target: &str) -> Result<TargetView<'_, 'c>, EvalError> {
        if !self.corpus.domains().contains(target) {
            return Err(EvalError::UnknownTarget(target.to_owned()));
        }
        let pool = Pool::from_corpus(self.corpus, target, true);
        if pool.is_empty() {
            return Err(EvalError::NoSources(target.to_owned()));
        }
        let target_docs = self.corpus.domain_indices(target);
        let eval_docs: Vec<usize> =
            target_docs.iter().copied().filter(|&i| self.corpus.documents()[i].label.is_some()).collect();
        if eval_docs.is_empty() {
            return Err(EvalError::UnlabeledTarget(target.to_owned()));
        }
        let pool_counts = (0..pool.len()).map(|p| self.counts[pool.corpus_index(p)].clone()).collect();
        let target_dist = term_distribution(target_docs.iter().map(|&i| &self.counts[i]), self.vocab.len());
        let mut dense = BTreeMap::new();
        for kind in [RepresentationKind::Embedding, RepresentationKind::Autoencoder] {
            if let Ok(all) = self.dense(kind) {
                let pool_vecs: Vec<Vec<f64>> = (0..pool.len()).map(|p| all[pool.corpus_index(p)].clone()).collect();
                dense.insert(kind, pool_vecs);
            }
        }
        Ok(TargetView {
            features: self,
            target: target.to_owned(),
            pool,
            pool_counts,
            dense,
            target_docs,
            eval_docs,
            target_dist,
        })
    }
}

fn distribution_row(counts: &SparseCounts, vocab_len: usize) -> SparseVec {
    let total = counts.in_vocab() as f64;
    SparseVec::from_sorted_pairs(vocab_len, counts.pairs().iter().map(|&(i, n)| (i, f64::from(n) / total)))
}

/// Per-target data: the labeled source pool, the target distribution and
/// pool-ordered representations.
pub struct TargetView<'f, 'c> {
    features: &'f CorpusFeatures<'c>,
    target: String,
    pool: Pool,
    pool_counts: Vec<SparseCounts>,
    dense: BTreeMap<RepresentationKind, Vec<Vec<f64>>>,
    target_docs: Vec<usize>,
    eval_docs: Vec<usize>,
    target_dist: TermDistribution,
}

impl TargetView<'_, '_> {
    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    pub fn pool_counts(&self) -> &[SparseCounts] {
        &self.pool_counts
    }

    pub fn target_distribution(&self) -> &TermDistribution {
        &self.target_dist
    }

    pub fn eval_docs(&self) -> &[usize] {
        &self.eval_docs
    }

    fn pool_dense(&self, kind: RepresentationKind) -> Result<&[Vec<f64>], EvalError> {
        self.features.dense(kind)?;
        Ok(&self.dense[&kind])
    }

    fn target_dense(&self, kind: RepresentationKind) -> Result<Vec<Vec<f64>>, EvalError> {
        let all = self.features.dense(kind)?;
        Ok(self.target_docs.iter().map(|&i| all[i].clone()).collect())
    }

    /// Builds the scorer for a representation/metric pair. Proxy scorers train
    /// their discriminator with `seed`.
    pub fn scorer(
        &self,
        representation: RepresentationKind,
        metric: Metric,
        seed: u64,
    ) -> Result<Box<dyn SubsetScorer + '_>, EvalError> {
        let invalid = EvalError::InvalidCombination { representation, metric };
        match (representation, metric) {
            (RepresentationKind::TermDist, Metric::JensenShannon) => {
                Ok(Box::new(TermJsScorer::new(&self.pool_counts, &self.target_dist)))
            }
            (RepresentationKind::TermDist, Metric::ProxyA) => {
                let vocab_len = self.features.vocab.len();
                let source: Vec<SparseVec> = par::map_slice(&self.pool_counts, |c| distribution_row(c, vocab_len));
                let target: Vec<SparseVec> =
                    self.target_docs.iter().map(|&i| distribution_row(&self.features.counts[i], vocab_len)).collect();
                let fitted = proxy_a_scores(&source, &target, seed)?;
                let features = ProxyFeatures::Terms { counts: &self.pool_counts, vocab_len };
                Ok(Box::new(ProxyScorer::new(features, fitted.discriminator)))
            }
            (RepresentationKind::TermDist, Metric::Cosine) => Err(invalid),
            (kind, Metric::Cosine) => {
                let target = self.target_dense(kind)?;
                let mean = mean_vector(&target);
                Ok(Box::new(DenseCosineScorer::new(self.pool_dense(kind)?, mean)))
            }
            (kind, Metric::ProxyA) => {
                let source = self.pool_dense(kind)?;
                let target = self.target_dense(kind)?;
                let fitted = proxy_a_scores(source, &target, seed)?;
                Ok(Box::new(ProxyScorer::new(ProxyFeatures::Dense(source), fitted.discriminator)))
            }
            (_, Metric::JensenShannon) => Err(invalid),
        }
    }
}

fn mean_vector(rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; dim];
    for r in rows {
        for (a, x) in acc.iter_mut().zip(r) {
            *a += x;
        }
    }
    acc.iter_mut().for_each(|a| *a /= rows.len() as f64);
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub runs: usize,
    pub base_seed: u64,
    pub ngram_max: usize,
    pub svm: SvmConfig,
}

impl Default for RunParams {
    fn default() -> Self {
        Self { runs: 10, base_seed: 0, ngram_max: 2, svm: SvmConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub selected: usize,
    pub shortfall: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen_domain: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub target: String,
    pub selection: SelectionConfig,
    pub params: RunParams,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub runs: Vec<RunRecord>,
}

/// Runs the protocol: for run `i` the seed is `base_seed + i`; the selection
/// (and any proxy discriminator) draws from that seed's sub-streams, tf-idf is
/// fit on the selected documents, and the classifier, whose shuffling stream
/// derives from `base_seed` alone, is evaluated on every labeled target
/// document. A deterministic strategy therefore yields identical runs.
pub fn run_experiment(
    view: &TargetView<'_, '_>,
    selection: &SelectionConfig,
    params: &RunParams,
) -> Result<ExperimentResult, EvalError> {
    let seeds: Vec<u64> = (0..params.runs as u64).map(|i| params.base_seed.wrapping_add(i)).collect();
    let classifier_seed = rng::derive_seed(params.base_seed, stream::CLASSIFIER);
    let records = par::map_range(seeds.len(), |run| {
        single_run(view, selection, params, seeds[run], classifier_seed)
            .map(|mut r| {
                r.run = run;
                r
            })
            .map_err(|e| EvalError::Run { run, source: Box::new(e) })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let accuracies: Vec<f64> = records.iter().map(|r| r.accuracy).collect();
    Ok(ExperimentResult {
        target: view.target.clone(),
        selection: SelectionConfig { seed: params.base_seed, ..selection.clone() },
        params: params.clone(),
        seeds,
        mean: mean(&accuracies),
        std: sample_std(&accuracies),
        accuracies,
        runs: records,
    })
}

fn single_run(
    view: &TargetView<'_, '_>,
    selection: &SelectionConfig,
    params: &RunParams,
    seed: u64,
    classifier_seed: u64,
) -> Result<RunRecord, EvalError> {
    let config = SelectionConfig { seed: rng::derive_seed(seed, stream::SELECTION), ..selection.clone() };
    config.validate()?;
    let scorer = if config.strategy.is_similarity_guided() {
        Some(view.scorer(config.representation, config.metric, rng::derive_seed(seed, stream::DISCRIMINATOR))?)
    } else {
        None
    };
    let result = select(&view.pool, &config, scorer.as_deref())?;

    let features = view.features;
    let docs = features.corpus.documents();
    let train_idx: Vec<usize> = result.pool_positions.iter().map(|&p| view.pool.corpus_index(p)).collect();
    let tfidf = TfidfVectorizer::fit(train_idx.iter().map(|&i| features.tokens[i].as_slice()), params.ngram_max)?;
    let x_train = par::map_slice(&train_idx, |&i| tfidf.transform(&features.tokens[i]));
    let y_train: Vec<Label> = train_idx.iter().map(|&i| docs[i].label.expect("pool is labeled")).collect();
    let model = train_classifier(&x_train, &y_train, &params.svm, classifier_seed)?;

    let x_eval = par::map_slice(&view.eval_docs, |&i| tfidf.transform(&features.tokens[i]));
    let y_eval: Vec<Label> = view.eval_docs.iter().map(|&i| docs[i].label.expect("eval docs are labeled")).collect();
    let accuracy = evaluate(&model, &x_eval, &y_eval)?;
    Ok(RunRecord {
        run: 0,
        seed,
        accuracy,
        selected: result.chosen.len(),
        shortfall: result.shortfall,
        chosen_domain: result.chosen_domain,
    })
}
