//! Multi-domain labeled corpora: JSONL ingestion, preprocessing, the shared
//! vocabulary, per-document term counts and tf-idf features.

mod preprocess;
mod tfidf;
mod vocab;

pub use preprocess::{preprocess, PreprocessOptions, DEFAULT_STOPWORDS};
pub use tfidf::{tfidf_features, TfidfVectorizer};
pub use vocab::{build_vocabulary, term_counts, SparseCounts, Vocabulary};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("document {0:?} has an empty domain")]
    EmptyDomain(String),
    #[error("document {id:?} has label {label} which is not part of the {task} task")]
    LabelOutsideTask { id: String, label: Label, task: Task },
    #[error("cannot fit features on an empty document list")]
    EmptyFit,
    #[error("unknown document id {0:?}")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Neutral,
    Positive,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Neutral => "neutral",
            Label::Positive => "positive",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative" => Ok(Label::Negative),
            "neutral" => Ok(Label::Neutral),
            "positive" => Ok(Label::Positive),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Binary review-level or ternary sentence-level sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    Ternary,
}

impl Task {
    pub fn labels(self) -> &'static [Label] {
        match self {
            Task::Binary => &[Label::Negative, Label::Positive],
            Task::Ternary => &[Label::Negative, Label::Neutral, Label::Positive],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Ternary => "ternary",
        })
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(Task::Binary),
            "ternary" => Ok(Task::Ternary),
            other => Err(format!("unknown task {other:?} (expected binary or ternary)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub domain: String,
    #[serde(default)]
    pub label: Option<Label>,
}

/// An ordered collection of documents grouped by domain. Immutable once built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    domains: BTreeSet<String>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(documents.len());
        let mut domains = BTreeSet::new();
        for (i, doc) in documents.iter().enumerate() {
            if doc.domain.is_empty() {
                return Err(CorpusError::EmptyDomain(doc.id.clone()));
            }
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(doc.id.clone()));
            }
            domains.insert(doc.domain.clone());
        }
        Ok(Self { documents, domains, by_id })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn domains(&self) -> &BTreeSet<String> {
        &self.domains
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index_of(id).map(|i| &self.documents[i])
    }

    /// Positions of the documents in `domain`, in corpus order.
    pub fn domain_indices(&self, domain: &str) -> Vec<usize> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.domain == domain)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks that every present label belongs to `task`.
    pub fn validate_task(&self, task: Task) -> Result<(), CorpusError> {
        for doc in &self.documents {
            if let Some(label) = doc.label {
                if !task.labels().contains(&label) {
                    return Err(CorpusError::LabelOutsideTask { id: doc.id.clone(), label, task });
                }
            }
        }
        Ok(())
    }

    /// Reads the canonical JSONL format. Blank lines are skipped.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut documents = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CorpusError::Parse { line: i + 1, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Parse { line: i + 1, message: e.to_string() })?;
            documents.push(doc);
        }
        Self::new(documents)
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut writer, doc)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Concatenates corpora in order, re-validating id uniqueness.
    pub fn concat(parts: impl IntoIterator<Item = Corpus>) -> Result<Self, CorpusError> {
        Self::new(parts.into_iter().flat_map(|c| c.documents).collect())
    }
}

/// Loads a JSONL corpus file.
pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_err)?;
    Corpus::read_jsonl(BufReader::new(file))
}

/// Loads a JSONL file, or every `*.jsonl` file of a directory in file-name order.
pub fn load_corpus_path(path: &Path) -> Result<Corpus, CorpusError> {
    if !path.is_dir() {
        return load_corpus(path);
    }
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let mut files: Vec<_> = std::fs::read_dir(path)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let parts = files.iter().map(|f| load_corpus(f)).collect::<Result<Vec<_>, _>>()?;
    Corpus::concat(parts)
}
