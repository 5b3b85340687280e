//! The evaluation protocol end to end on small synthetic corpora.

use datasel::commands::{cmd_evaluate, Inputs, Method, RunConfig};
use datasel::evaluation::{mean, run_experiment, sample_std, CorpusFeatures, EvalError, FeatureOptions, RunParams};
use datasel::selection::{RepresentationKind, SelectionConfig, Strategy};
use datasel::similarity::Metric;
use datasel::synthetic::{generate, DomainSpec};

fn corpus() -> datasel::corpus::Corpus {
    let spec = |name: &str, overlap| DomainSpec {
        name: name.into(),
        overlap,
        docs_per_label: 60,
        label_noise: 0.05,
        seed: 9,
        ..DomainSpec::default()
    };
    generate(&[spec("near", 0.8), spec("far", 0.0)], &spec("target", 0.0)).unwrap()
}

fn config(strategy: Strategy) -> SelectionConfig {
    SelectionConfig { n: 90, strategy, s: 10, m: 40, ..Default::default() }
}

#[test]
fn summary_statistics_match_run_accuracies() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let params = RunParams { runs: 4, base_seed: 3, ..RunParams::default() };
    let r = run_experiment(&view, &config(Strategy::Random), &params).unwrap();
    assert_eq!(r.accuracies.len(), 4);
    assert_eq!(r.seeds, vec![3, 4, 5, 6]);
    assert_eq!(r.mean, mean(&r.accuracies));
    assert_eq!(r.std, sample_std(&r.accuracies));
    let recomputed = r.accuracies.iter().sum::<f64>() / 4.0;
    assert!((r.mean - recomputed).abs() < 1e-15);
    assert!(r.runs.iter().all(|run| run.selected == 90 && run.shortfall == 0));
    assert_eq!(view.eval_docs().len(), 180);
}

#[test]
fn deterministic_strategy_gives_identical_runs() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let params = RunParams { runs: 3, ..RunParams::default() };
    let r = run_experiment(&view, &config(Strategy::Instance), &params).unwrap();
    assert!(r.accuracies.windows(2).all(|w| w[0] == w[1]), "{:?}", r.accuracies);
    assert_eq!(r.std, 0.0);
}

#[test]
fn experiments_are_reproducible() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let params = RunParams { runs: 2, ..RunParams::default() };
    for strategy in [Strategy::Random, Strategy::Balanced, Strategy::Domain, Strategy::Subset] {
        let a = run_experiment(&view, &config(strategy), &params).unwrap();
        let b = run_experiment(&view, &config(strategy), &params).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn domain_level_prefers_the_overlapping_source() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let r = run_experiment(&view, &config(Strategy::Domain), &RunParams { runs: 2, ..RunParams::default() }).unwrap();
    assert!(r.runs.iter().all(|run| run.chosen_domain.as_deref() == Some("near")));
}

#[test]
fn proxy_instance_selection_runs_on_term_distributions() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let selection = SelectionConfig { metric: Metric::ProxyA, ..config(Strategy::Instance) };
    let r = run_experiment(&view, &selection, &RunParams { runs: 2, ..RunParams::default() }).unwrap();
    assert!(r.mean > 0.0);
}

#[test]
fn invalid_metric_pairing_is_rejected() {
    let corpus = corpus();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view("target").unwrap();
    let selection = SelectionConfig { metric: Metric::Cosine, ..config(Strategy::Instance) };
    let err = run_experiment(&view, &selection, &RunParams { runs: 2, ..RunParams::default() }).unwrap_err();
    let EvalError::Run { source, .. } = err else { panic!("unexpected {err}") };
    assert!(matches!(*source, EvalError::InvalidCombination { .. }));
    assert!(matches!(features.target_view("nope"), Err(EvalError::UnknownTarget(_))));
}

#[test]
fn evaluate_reports_baselines_and_methods() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        targets: vec!["target".into()],
        output: dir.path().to_owned(),
        runs: 2,
        methods: vec![
            Method::new(Strategy::Domain, RepresentationKind::TermDist, Metric::JensenShannon),
            Method::new(Strategy::Subset, RepresentationKind::TermDist, Metric::JensenShannon),
        ],
        selection: datasel::commands::config::SelectionSection { n: Some(90), s: 10, m: 40, ..Default::default() },
        ..RunConfig::default()
    };
    let inputs = Inputs::from_corpus(config, corpus()).unwrap();
    let report = cmd_evaluate(&inputs).unwrap();
    let rows = &report.targets[0].rows;
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].strategy, Strategy::Random);
    assert_eq!(rows[1].strategy, Strategy::Balanced);
    let tsv = std::fs::read_to_string(dir.path().join("results.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 5);
    assert!(tsv.starts_with("target_domain\tstrategy\trepresentation\tmetric\tmean_acc\tstd\tp_vs_rand\tp_vs_all\tsig"));
}
