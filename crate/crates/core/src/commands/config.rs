//! TOML run configuration. Every key is optional; omitted keys take the
//! defaults below, and command-line flags override file values.
//!
//! ```toml
//! task = "ternary"            # or "binary"
//! corpus = "data/"            # JSONL file or directory of JSONL files
//! targets = ["books"]         # "all" = every domain in turn
//! output = "out"
//! embeddings = "glove.txt"    # needed for representation = "embedding"
//! runs = 10
//! seed = 0
//! vocab_size = 10000
//! ngram_max = 2
//! sif_a = 1e-5
//! grid = false                # evaluate the full strategy x representation grid
//! representations = ["term_dist", "embedding", "autoencoder"]
//! sweep_n = [500, 1000, 2000]
//! methods = ["subset:term_dist:jensen_shannon", "instance:term_dist:proxy_a"]
//!
//! [selection]
//! n = 2000                    # default 2000 (ternary) / 1600 (binary)
//! strategy = "subset"
//! representation = "term_dist"
//! metric = "jensen_shannon"   # default follows the representation
//! s = 20
//! m = 20000
//! proxy_subset = false
//!
//! [autoencoder]
//! hidden = 1000
//! epochs = 50
//! masking_prob = 0.8
//! learning_rate = 0.001
//! batch_size = 64
//!
//! [svm]
//! epochs = 10
//! learning_rate = 0.1
//! l2 = 0.0001
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CommandError;
use crate::autoencoder::AeTrainConfig;
use crate::corpus::Task;
use crate::evaluation::SvmConfig;
use crate::representations::DEFAULT_SIF_SMOOTHING;
use crate::selection::{RepresentationKind, SelectionConfig, Strategy, DEFAULT_SUBSETS_PER_ITERATION, DEFAULT_SUBSET_SIZE};
use crate::similarity::Metric;

pub const DEFAULT_N_TERNARY: usize = 2000;
pub const DEFAULT_N_BINARY: usize = 1600;

pub fn default_n(task: Task) -> usize {
    match task {
        Task::Ternary => DEFAULT_N_TERNARY,
        Task::Binary => DEFAULT_N_BINARY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub n: Option<usize>,
    pub strategy: Strategy,
    pub representation: RepresentationKind,
    pub metric: Option<Metric>,
    pub s: usize,
    pub m: usize,
    pub proxy_subset: bool,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self {
            n: None,
            strategy: Strategy::Subset,
            representation: RepresentationKind::TermDist,
            metric: None,
            s: DEFAULT_SUBSET_SIZE,
            m: DEFAULT_SUBSETS_PER_ITERATION,
            proxy_subset: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencoderSection {
    pub hidden: usize,
    pub epochs: usize,
    pub masking_prob: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for AutoencoderSection {
    fn default() -> Self {
        let d = AeTrainConfig::default();
        Self {
            hidden: d.hidden,
            epochs: d.epochs,
            masking_prob: d.masking_prob,
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
        }
    }
}

/// A selection method: strategy plus, for similarity-guided strategies, the
/// representation and metric. Written `strategy[:representation[:metric]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method {
    pub strategy: Strategy,
    pub representation: RepresentationKind,
    pub metric: Metric,
}

impl Method {
    pub fn new(strategy: Strategy, representation: RepresentationKind, metric: Metric) -> Self {
        Self { strategy, representation, metric }
    }

    pub fn baseline(strategy: Strategy) -> Self {
        Self::new(strategy, RepresentationKind::TermDist, Metric::JensenShannon)
    }

    /// Equality that ignores representation and metric for baselines.
    pub fn same_as(&self, other: &Method) -> bool {
        self.strategy == other.strategy
            && (!self.strategy.is_similarity_guided()
                || (self.representation == other.representation && self.metric == other.metric))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strategy.is_similarity_guided() {
            write!(f, "{}:{}:{}", self.strategy, self.representation, self.metric)
        } else {
            write!(f, "{}", self.strategy)
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let strategy: Strategy = parts.next().unwrap_or_default().parse()?;
        let representation: RepresentationKind =
            parts.next().map(str::parse).transpose()?.unwrap_or(RepresentationKind::TermDist);
        let metric = parts.next().map(str::parse).transpose()?.unwrap_or(representation.default_metric());
        if parts.next().is_some() {
            return Err(format!("method {s:?} has more than three parts"));
        }
        Ok(Self { strategy, representation, metric })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub corpus: Option<PathBuf>,
    pub targets: Vec<String>,
    pub output: PathBuf,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub runs: usize,
    pub seed: u64,
    pub vocab_size: usize,
    pub ngram_max: usize,
    pub sif_a: f64,
    pub grid: bool,
    pub representations: Vec<RepresentationKind>,
    pub methods: Vec<Method>,
    pub sweep_n: Vec<usize>,
    pub selection: SelectionSection,
    pub autoencoder: AutoencoderSection,
    pub svm: SvmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::Ternary,
            corpus: None,
            targets: Vec::new(),
            output: PathBuf::from("out"),
            embeddings: None,
            stopwords: None,
            runs: 10,
            seed: 0,
            vocab_size: 10_000,
            ngram_max: 2,
            sif_a: DEFAULT_SIF_SMOOTHING,
            grid: false,
            representations: vec![
                RepresentationKind::TermDist,
                RepresentationKind::Embedding,
                RepresentationKind::Autoencoder,
            ],
            methods: Vec::new(),
            sweep_n: Vec::new(),
            selection: SelectionSection::default(),
            autoencoder: AutoencoderSection::default(),
            svm: SvmConfig::default(),
        }
    }
}

fn config_error(message: impl Into<String>) -> CommandError {
    CommandError::Config(message.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CommandError> {
        toml::from_str(text).map_err(|e| config_error(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CommandError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills task-dependent and representation-dependent defaults and checks
    /// the invariants. The result is the configuration echoed in reports.
    pub fn resolve(mut self) -> Result<Self, CommandError> {
        self.selection.n.get_or_insert(default_n(self.task));
        self.selection.metric.get_or_insert(self.selection.representation.default_metric());
        if self.runs == 0 {
            return Err(config_error("runs must be at least 1"));
        }
        if self.vocab_size == 0 || self.ngram_max == 0 {
            return Err(config_error("vocab_size and ngram_max must be at least 1"));
        }
        if !(self.sif_a > 0.0) {
            return Err(config_error("sif_a must be positive"));
        }
        if self.sweep_n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_error("sweep_n must be strictly ascending"));
        }
        self.selection_config(Method::new(
            self.selection.strategy,
            self.selection.representation,
            self.selection.metric.unwrap_or(Metric::JensenShannon),
        ))
        .validate()
        .map_err(|e| config_error(e.to_string()))?;
        self.ae_config(0).validate().map_err(|e| config_error(e.to_string()))?;
        for path in [&self.corpus, &self.embeddings, &self.stopwords].into_iter().flatten() {
            if !path.exists() {
                return Err(config_error(format!("path does not exist: {}", path.display())));
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.selection.n.unwrap_or(default_n(self.task))
    }

    /// The method of the `[selection]` section.
    pub fn primary_method(&self) -> Method {
        let r = self.selection.representation;
        Method::new(self.selection.strategy, r, self.selection.metric.unwrap_or(r.default_metric()))
    }

    /// Methods to evaluate besides the baselines: the full grid, the
    /// configured list, or the `[selection]` method.
    pub fn evaluation_methods(&self) -> Vec<Method> {
        if self.grid {
            let mut out = Vec::new();
            for &r in &self.representations {
                for strategy in [Strategy::Domain, Strategy::Instance, Strategy::Subset] {
                    out.push(Method::new(strategy, r, r.default_metric()));
                }
                out.push(Method::new(Strategy::Instance, r, Metric::ProxyA));
            }
            out
        } else if !self.methods.is_empty() {
            self.methods.clone()
        } else {
            vec![self.primary_method()]
        }
    }

    pub fn selection_config(&self, method: Method) -> SelectionConfig {
        SelectionConfig {
            n: self.n(),
            strategy: method.strategy,
            representation: method.representation,
            metric: method.metric,
            s: self.selection.s,
            m: self.selection.m,
            seed: self.seed,
            proxy_subset: self.selection.proxy_subset,
        }
    }

    pub fn ae_config(&self, seed: u64) -> AeTrainConfig {
        let a = &self.autoencoder;
        AeTrainConfig {
            hidden: a.hidden,
            epochs: a.epochs,
            masking_prob: a.masking_prob,
            learning_rate: a.learning_rate,
            batch_size: a.batch_size,
            seed,
            ..AeTrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap().resolve().unwrap();
        assert_eq!(c.n(), 2000);
        assert_eq!((c.selection.s, c.selection.m, c.runs), (20, 20_000, 10));
        assert_eq!(c.selection.metric, Some(Metric::JensenShannon));
        assert_eq!((c.autoencoder.hidden, c.autoencoder.epochs, c.autoencoder.masking_prob), (1000, 50, 0.8));
        assert_eq!(c.vocab_size, 10_000);
        assert_eq!(c.sif_a, 1e-5);
    }

    #[test]
    fn binary_default_n() {
        let c = RunConfig::from_toml("task = \"binary\"").unwrap().resolve().unwrap();
        assert_eq!(c.n(), 1600);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("colour = 3").is_err());
        assert!(RunConfig::from_toml("[selection]\nsize = 3").is_err());
    }

    #[test]
    fn metric_follows_representation() {
        let c = RunConfig::from_toml("[selection]\nrepresentation = \"autoencoder\"").unwrap().resolve().unwrap();
        assert_eq!(c.selection.metric, Some(Metric::Cosine));
    }

    #[test]
    fn method_strings() {
        let m: Method = "subset:ae".parse().unwrap();
        assert_eq!(m, Method::new(Strategy::Subset, RepresentationKind::Autoencoder, Metric::Cosine));
        assert_eq!(m.to_string(), "subset:autoencoder:cosine");
        assert_eq!("random".parse::<Method>().unwrap().to_string(), "random");
        assert!("subset:term:js:x".parse::<Method>().is_err());
        let c = RunConfig::from_toml("methods = [\"instance:term_dist:proxy_a\"]").unwrap();
        assert_eq!(c.methods[0].metric, Metric::ProxyA);
    }

    #[test]
    fn grid_covers_table_layout() {
        let c = RunConfig { grid: true, ..RunConfig::default() };
        assert_eq!(c.evaluation_methods().len(), 12);
    }

    #[test]
    fn invalid_values() {
        assert!(RunConfig { runs: 0, ..RunConfig::default() }.resolve().is_err());
        assert!(RunConfig { sweep_n: vec![1000, 500], ..RunConfig::default() }.resolve().is_err());
        assert!(RunConfig { corpus: Some("/no/such/file".into()), ..RunConfig::default() }.resolve().is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::default().resolve().unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
