use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{preprocess, Corpus, CorpusError, PreprocessOptions, Vocabulary};
use crate::sparse::SparseVec;

/// Smoothed tf-idf over unigrams (and optionally bigrams):
/// `idf = ln((1 + N) / (1 + df)) + 1`, raw term frequency, L2-normalized rows.
///
/// The feature space is fixed at fit time; unseen n-grams are dropped when
/// transforming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    ngram_max: usize,
    features: HashMap<String, u32>,
    idf: Vec<f64>,
    n_docs: usize,
}

fn for_each_ngram(tokens: &[String], ngram_max: usize, mut f: impl FnMut(&str)) {
    for t in tokens {
        f(t);
    }
    if ngram_max >= 2 {
        let mut buf = String::new();
        for w in tokens.windows(2) {
            buf.clear();
            buf.push_str(&w[0]);
            buf.push(' ');
            buf.push_str(&w[1]);
            f(&buf);
        }
    }
}

impl TfidfVectorizer {
    /// Fits the n-gram feature space and document frequencies on `docs`.
    /// Features are indexed in lexicographic order.
    pub fn fit<'a, I>(docs: I, ngram_max: usize) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        assert!((1..=2).contains(&ngram_max), "ngram_max must be 1 or 2");
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let mut seen: Vec<String> = Vec::new();
            for_each_ngram(doc, ngram_max, |g| seen.push(g.to_owned()));
            seen.sort_unstable();
            seen.dedup();
            for g in seen {
                *df.entry(g).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(CorpusError::EmptyFit);
        }
        let mut features = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (i, (g, d)) in df.into_iter().enumerate() {
            features.insert(g, i as u32);
            idf.push(smoothed_idf(n_docs, d));
        }
        Ok(Self { ngram_max, features, idf, n_docs })
    }

    /// Fits unigram document frequencies over a fixed vocabulary; feature `i`
    /// is vocabulary token `i`.
    pub fn fit_with_vocabulary<'a, I>(docs: I, vocab: &Vocabulary) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut df = vec![0u64; vocab.len()];
        let mut n_docs = 0;
        let mut seen = Vec::new();
        for doc in docs {
            n_docs += 1;
            seen.clear();
            seen.extend(doc.iter().filter_map(|t| vocab.index_of(t)));
            seen.sort_unstable();
            seen.dedup();
            for &i in &seen {
                df[i] += 1;
            }
        }
        if n_docs == 0 {
            return Err(CorpusError::EmptyFit);
        }
        let features =
            vocab.tokens().iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let idf = df.into_iter().map(|d| smoothed_idf(n_docs, d)).collect();
        Ok(Self { ngram_max: 1, features, idf, n_docs })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn feature_index(&self, ngram: &str) -> Option<usize> {
        self.features.get(ngram).map(|&i| i as usize)
    }

    pub fn transform(&self, tokens: &[String]) -> SparseVec {
        let mut tf: BTreeMap<u32, f64> = BTreeMap::new();
        for_each_ngram(tokens, self.ngram_max, |g| {
            if let Some(&i) = self.features.get(g) {
                *tf.entry(i).or_default() += 1.0;
            }
        });
        let mut weighted: Vec<(u32, f64)> =
            tf.into_iter().map(|(i, c)| (i, c * self.idf[i as usize])).collect();
        let norm = weighted.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weighted {
                *w /= norm;
            }
        }
        SparseVec::from_sorted_pairs(self.dim(), weighted)
    }
}

fn smoothed_idf(n_docs: usize, df: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fits tf-idf on the listed documents of `corpus` and returns the fitted
/// vectorizer together with their feature vectors (in `ids` order).
pub fn tfidf_features(
    corpus: &Corpus,
    ids: &[&str],
    ngram_max: usize,
    options: &PreprocessOptions,
) -> Result<(TfidfVectorizer, Vec<SparseVec>), CorpusError> {
    let token_lists = ids
        .iter()
        .map(|id| {
            corpus
                .get(id)
                .map(|d| preprocess(&d.text, options))
                .ok_or_else(|| CorpusError::UnknownId((*id).to_owned()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let vectorizer = TfidfVectorizer::fit(token_lists.iter().map(Vec::as_slice), ngram_max)?;
    let vectors = token_lists.iter().map(|t| vectorizer.transform(t)).collect();
    Ok((vectorizer, vectors))
}
