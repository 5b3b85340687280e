//! The four front-end commands. Each is a pure function of the effective
//! configuration and its input files, and writes its reports into the output
//! directory.

pub mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Method, RunConfig};

use crate::corpus::{load_corpus_path, Corpus, PreprocessOptions};
use crate::embeddings::EmbeddingTable;
use crate::evaluation::{
    compare, run_experiment, write_results_tsv, write_sweep_tsv, CorpusFeatures, EvalError, ExperimentResult,
    FeatureOptions, ResultRow, RunParams, SweepRow,
};
use crate::rng::{self, stream};
use crate::selection::{select, RepresentationKind, SelectionError, SelectionResult, Strategy};
use crate::synthetic::{self, DomainSpec, SyntheticError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CommandError {
    /// 1 usage/config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 1,
            CommandError::Data(_) => 2,
            CommandError::Numeric(_) => 3,
        }
    }
}

impl From<EvalError> for CommandError {
    fn from(e: EvalError) -> Self {
        let message = e.to_string();
        if e.is_numeric() {
            return CommandError::Numeric(message);
        }
        let inner = match &e {
            EvalError::Run { source, .. } => source.as_ref(),
            other => other,
        };
        match inner {
            EvalError::UnknownTarget(_)
            | EvalError::MissingEmbeddings
            | EvalError::InvalidCombination { .. }
            | EvalError::Selection(SelectionError::InvalidConfig(_) | SelectionError::ProxySubsetDisabled) => {
                CommandError::Config(message)
            }
            _ => CommandError::Data(message),
        }
    }
}

impl From<SyntheticError> for CommandError {
    fn from(e: SyntheticError) -> Self {
        CommandError::Config(e.to_string())
    }
}

fn write_error(path: &Path, e: impl std::fmt::Display) -> CommandError {
    CommandError::Data(format!("cannot write {}: {e}", path.display()))
}

fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), CommandError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| write_error(path, e))?;
    }
    let file = fs::File::create(path).map_err(|e| write_error(path, e))?;
    let mut out = BufWriter::new(file);
    fill(&mut out).and_then(|_| out.flush()).map_err(|e| write_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CommandError> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")
    })
}

/// Loaded corpus and resolved target list.
pub struct Inputs {
    pub config: RunConfig,
    pub corpus: Corpus,
    pub targets: Vec<String>,
}

impl Inputs {
    pub fn load(config: RunConfig) -> Result<Self, CommandError> {
        let config = config.resolve()?;
        let path = config.corpus.clone().ok_or_else(|| CommandError::Config("no corpus given".into()))?;
        let corpus = load_corpus_path(&path).map_err(|e| CommandError::Data(e.to_string()))?;
        Self::from_corpus(config, corpus)
    }

    pub fn from_corpus(config: RunConfig, corpus: Corpus) -> Result<Self, CommandError> {
        let config = config.resolve()?;
        corpus.validate_task(config.task).map_err(|e| CommandError::Data(e.to_string()))?;
        let targets: Vec<String> = if config.targets.iter().any(|t| t == "all") {
            corpus.domains().iter().cloned().collect()
        } else {
            config.targets.clone()
        };
        if targets.is_empty() {
            return Err(CommandError::Config("no target domain given".into()));
        }
        for t in &targets {
            if !corpus.domains().contains(t) {
                return Err(CommandError::Config(format!("unknown target domain {t:?}")));
            }
        }
        Ok(Self { config, corpus, targets })
    }

    fn single_target(&self, command: &str) -> Result<&str, CommandError> {
        match self.targets.as_slice() {
            [t] => Ok(t),
            _ => Err(CommandError::Config(format!("{command} needs exactly one target domain"))),
        }
    }

    /// Builds the features every method in `methods` needs.
    pub fn features(&self, methods: &[Method]) -> Result<CorpusFeatures<'_>, CommandError> {
        let c = &self.config;
        let mut preprocess = PreprocessOptions::default();
        if let Some(path) = &c.stopwords {
            preprocess = preprocess
                .with_stopwords_file(path)
                .map_err(|e| CommandError::Data(format!("cannot read stopwords {}: {e}", path.display())))?;
        }
        let options = FeatureOptions {
            vocab_size: c.vocab_size,
            preprocess,
            sif_a: c.sif_a,
            autoencoder: c.ae_config(rng::derive_seed(c.seed, stream::AUTOENCODER)),
        };
        let needs = |kind| methods.iter().any(|m| m.strategy.is_similarity_guided() && m.representation == kind);
        let mut features = CorpusFeatures::new(&self.corpus, &options);
        if needs(RepresentationKind::Embedding) {
            let path = c.embeddings.as_ref().ok_or(EvalError::MissingEmbeddings)?;
            let table = EmbeddingTable::load(path, Some(&features.vocab))
                .map_err(|e| CommandError::Data(format!("embeddings {}: {e}", path.display())))?;
            log::info!("loaded {} embeddings of dimension {}", table.len(), table.dim());
            features.with_embeddings(&table, c.sif_a)?;
        }
        if needs(RepresentationKind::Autoencoder) {
            log::info!("training autoencoder on {} documents", self.corpus.len());
            features.with_autoencoder(&options.autoencoder)?;
        }
        Ok(features)
    }

    fn run_params(&self) -> RunParams {
        let c = &self.config;
        RunParams { runs: c.runs, base_seed: c.seed, ngram_max: c.ngram_max, svm: c.svm.clone() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub config: RunConfig,
    pub target: String,
    pub result: SelectionResult,
}

/// Selects with the `[selection]` method for the single target and writes
/// `selection.ids` and `selection.json`. Uses the sub-streams of run 0 of
/// the evaluation protocol.
pub fn cmd_select(inputs: &Inputs) -> Result<SelectionReport, CommandError> {
    let target = inputs.single_target("select")?;
    let method = inputs.config.primary_method();
    let features = inputs.features(&[method])?;
    let view = features.target_view(target)?;
    let seed = inputs.config.seed;
    let mut selection = inputs.config.selection_config(method);
    selection.seed = rng::derive_seed(seed, stream::SELECTION);
    let scorer = if method.strategy.is_similarity_guided() {
        Some(view.scorer(method.representation, method.metric, rng::derive_seed(seed, stream::DISCRIMINATOR))?)
    } else {
        None
    };
    let result = select(view.pool(), &selection, scorer.as_deref()).map_err(EvalError::from)?;
    let report = SelectionReport { config: inputs.config.clone(), target: target.to_owned(), result };
    let out = &inputs.config.output;
    write_file(&out.join("selection.ids"), |w| w.write_all(report.result.id_list().as_bytes()))?;
    write_json(&out.join("selection.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetResults {
    pub target: String,
    pub rows: Vec<ResultRow>,
    pub experiments: Vec<ExperimentResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub targets: Vec<TargetResults>,
}

/// Runs the protocol for the rand and all baselines and every configured
/// method on each target; writes `results.tsv` and `results.json`.
pub fn cmd_evaluate(inputs: &Inputs) -> Result<EvaluationReport, CommandError> {
    let baselines = [Method::baseline(Strategy::Random), Method::baseline(Strategy::Balanced)];
    let mut methods = baselines.to_vec();
    for m in inputs.config.evaluation_methods() {
        if !methods.iter().any(|x| x.same_as(&m)) {
            methods.push(m);
        }
    }
    let features = inputs.features(&methods)?;
    let params = inputs.run_params();
    let mut targets = Vec::new();
    for target in &inputs.targets {
        let view = features.target_view(target)?;
        let mut experiments = Vec::with_capacity(methods.len());
        for &m in &methods {
            log::info!("target {target}: {m}");
            experiments.push(run_experiment(&view, &inputs.config.selection_config(m), &params)?);
        }
        let rows = experiments.iter().map(|e| compare(e, &experiments[0], &experiments[1])).collect();
        targets.push(TargetResults { target: target.clone(), rows, experiments });
    }
    let report = EvaluationReport { config: inputs.config.clone(), targets };
    let out = &inputs.config.output;
    let rows: Vec<ResultRow> = report.targets.iter().flat_map(|t| t.rows.iter().cloned()).collect();
    write_file(&out.join("results.tsv"), |w| write_results_tsv(w, &rows))?;
    write_json(&out.join("results.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub target: String,
    pub rows: Vec<SweepRow>,
}

/// Mean accuracy of every configured method at each training-set size in
/// `sweep_n` (or the configured `n`); writes `sweep.tsv` and `sweep.json`.
pub fn cmd_sweep(inputs: &Inputs) -> Result<SweepReport, CommandError> {
    let target = inputs.single_target("sweep")?;
    let methods = inputs.config.evaluation_methods();
    let sizes = if inputs.config.sweep_n.is_empty() { vec![inputs.config.n()] } else { inputs.config.sweep_n.clone() };
    let features = inputs.features(&methods)?;
    let view = features.target_view(target)?;
    let params = inputs.run_params();
    let mut rows = Vec::new();
    for &n in &sizes {
        for &m in &methods {
            let selection = crate::selection::SelectionConfig { n, ..inputs.config.selection_config(m) };
            let r = run_experiment(&view, &selection, &params)?;
            rows.push(SweepRow { n, method: m.to_string(), mean: r.mean, std: r.std });
        }
    }
    let report = SweepReport { config: inputs.config.clone(), target: target.to_owned(), rows };
    let out = &inputs.config.output;
    write_file(&out.join("sweep.tsv"), |w| write_sweep_tsv(w, &report.rows))?;
    write_json(&out.join("sweep.json"), &report)?;
    Ok(report)
}

/// A generator spec file: the target domain and its sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub target: DomainSpec,
    #[serde(default)]
    pub sources: Vec<DomainSpec>,
}

impl GeneratorSpec {
    pub fn load(path: &Path) -> Result<Self, CommandError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CommandError::Config(format!("cannot read spec {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CommandError::Config(format!("invalid spec {}: {e}", path.display())))
    }

    /// Overrides every domain's seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        for s in self.sources.iter_mut().chain(std::iter::once(&mut self.target)) {
            s.seed = seed;
        }
        self
    }
}

/// Writes one `<domain>.jsonl` file per domain into `dir`, sorted by name.
pub fn write_domains(corpus: &Corpus, dir: &Path) -> Result<Vec<PathBuf>, CommandError> {
    let mut written = Vec::new();
    for domain in corpus.domains() {
        let path = dir.join(format!("{domain}.jsonl"));
        let docs = corpus.domain_indices(domain);
        write_file(&path, |w| {
            for &i in &docs {
                serde_json::to_writer(&mut *w, &corpus.documents()[i])?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
        written.push(path);
    }
    Ok(written)
}

/// Generates the corpus of a spec file.
pub fn cmd_generate(spec: &GeneratorSpec, out: &Path) -> Result<Vec<PathBuf>, CommandError> {
    let corpus = synthetic::generate(&spec.sources, &spec.target)?;
    write_domains(&corpus, out)
}

/// Generates the built-in catalog into `out/<scenario>/`.
pub fn cmd_generate_catalog(out: &Path, seed: u64) -> Result<Vec<PathBuf>, CommandError> {
    let mut written = Vec::new();
    for scenario in synthetic::benchmark_suite(seed)? {
        written.extend(write_domains(&scenario.corpus, &out.join(&scenario.name))?);
    }
    Ok(written)
}
