use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{preprocess, Corpus, PreprocessOptions};

/// The shared vocabulary: the `cap` most frequent tokens across all domains,
/// by descending frequency with lexicographic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    cap: usize,
}

impl Vocabulary {
    /// Ranks tokens from any number of token lists.
    pub fn from_token_lists<'a, I, L>(lists: I, cap: usize) -> Self
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = &'a String>,
    {
        let mut freq: HashMap<&'a str, u64> = HashMap::new();
        for list in lists {
            for tok in list {
                *freq.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(cap);
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_owned()).collect(), cap)
    }

    /// Builds from an already ordered token list (e.g. a reloaded vocabulary).
    pub fn from_tokens(tokens: Vec<String>, cap: usize) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index, cap }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }
}

/// Tokenizes every document of `corpus` and ranks the tokens.
pub fn build_vocabulary(corpus: &Corpus, cap: usize, options: &PreprocessOptions) -> Vocabulary {
    assert!(cap >= 1, "vocabulary cap must be at least 1");
    let lists: Vec<Vec<String>> =
        corpus.documents().iter().map(|d| preprocess(&d.text, options)).collect();
    Vocabulary::from_token_lists(lists.iter(), cap)
}

/// In-vocabulary term counts of one document plus its total token count
/// (out-of-vocabulary tokens included).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SparseCounts {
    pairs: Vec<(u32, u32)>,
    total: u64,
}

impl SparseCounts {
    /// Pairs must have strictly increasing indices and positive counts.
    pub fn new(pairs: Vec<(u32, u32)>, total: u64) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(pairs.iter().all(|p| p.1 > 0));
        debug_assert!(pairs.iter().map(|p| u64::from(p.1)).sum::<u64>() <= total);
        Self { pairs, total }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sum of in-vocabulary counts.
    pub fn in_vocab(&self) -> u64 {
        self.pairs.iter().map(|p| u64::from(p.1)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn term_counts(tokens: &[String], vocab: &Vocabulary) -> SparseCounts {
    let mut idx: Vec<u32> =
        tokens.iter().filter_map(|t| vocab.index_of(t)).map(|i| i as u32).collect();
    idx.sort_unstable();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for i in idx {
        match pairs.last_mut() {
            Some(last) if last.0 == i => last.1 += 1,
            _ => pairs.push((i, 1)),
        }
    }
    SparseCounts::new(pairs, tokens.len() as u64)
}
