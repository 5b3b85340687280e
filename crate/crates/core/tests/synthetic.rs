//! Behavior of the synthetic benchmark generator.

use datasel::corpus::{Label, PreprocessOptions, Task, TfidfVectorizer};
use datasel::evaluation::{evaluate, mean, train_classifier, CorpusFeatures, FeatureOptions, SvmConfig};
use datasel::representations::term_distribution;
use datasel::selection::{select, Pool, SelectionConfig, Strategy, TermJsScorer};
use datasel::similarity::js_divergence;
use datasel::synthetic::{generate, graded_specs, DomainSpec, GRADED_OVERLAPS};

fn small(name: &str, overlap: f64, seed: u64) -> DomainSpec {
    DomainSpec { name: name.into(), overlap, docs_per_label: 100, seed, ..DomainSpec::default() }
}

#[test]
fn generation_is_deterministic() {
    let specs = [small("a", 0.3, 5), small("b", 0.0, 5)];
    let target = small("t", 0.0, 5);
    let x = generate(&specs, &target).unwrap();
    let y = generate(&specs, &target).unwrap();
    assert_eq!(x, y);
    let (mut bx, mut by) = (Vec::new(), Vec::new());
    x.write_jsonl(&mut bx).unwrap();
    y.write_jsonl(&mut by).unwrap();
    assert_eq!(bx, by);
    let z = generate(&[small("a", 0.3, 6), small("b", 0.0, 6)], &small("t", 0.0, 6)).unwrap();
    assert_ne!(x, z);
}

#[test]
fn divergence_from_target_falls_as_overlap_rises() {
    let (sources, target) = graded_specs(3);
    let corpus = generate(&sources, &target).unwrap();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let dist = |domain: &str| {
        let idx = corpus.domain_indices(domain);
        term_distribution(idx.iter().map(|&i| &features.counts[i]), features.vocab.len())
    };
    let t = dist(&target.name);
    let js: Vec<f64> = sources.iter().map(|s| js_divergence(&dist(&s.name), &t).unwrap().value).collect();
    // Sources are listed by decreasing overlap.
    assert!(GRADED_OVERLAPS.windows(2).all(|w| w[0] > w[1]));
    for w in js.windows(2) {
        assert!(w[0] < w[1], "{js:?}");
    }
}

#[test]
fn label_noise_rate_is_respected() {
    let spec = DomainSpec { name: "noisy".into(), label_noise: 0.1, docs_per_label: 1500, seed: 2, ..DomainSpec::default() };
    let corpus = generate(&[], &spec).unwrap();
    let labels = Task::Ternary.labels();
    let flipped = corpus
        .documents()
        .iter()
        .filter(|d| {
            let k: usize = d.id.rsplit('-').next().unwrap().parse().unwrap();
            d.label != Some(labels[k % labels.len()])
        })
        .count();
    let rate = flipped as f64 / corpus.len() as f64;
    assert!((rate - 0.1).abs() < 0.02, "{rate}");
}

#[test]
fn binary_task_uses_two_labels() {
    let spec = DomainSpec { name: "bin".into(), task: Task::Binary, docs_per_label: 10, ..DomainSpec::default() };
    let corpus = generate(&[], &spec).unwrap();
    assert_eq!(corpus.len(), 20);
    assert!(corpus.documents().iter().all(|d| d.label != Some(Label::Neutral)));
}

#[test]
fn disjoint_domain_trains_a_chance_level_classifier() {
    let mut accs = Vec::new();
    for seed in 0..10 {
        let (sources, target) = graded_specs(seed);
        let corpus = generate(&sources, &target).unwrap();
        let opts = PreprocessOptions::default();
        let tokens = |d: &str| -> Vec<(Vec<String>, Label)> {
            corpus
                .domain_indices(d)
                .into_iter()
                .map(|i| {
                    let doc = &corpus.documents()[i];
                    (datasel::corpus::preprocess(&doc.text, &opts), doc.label.unwrap())
                })
                .collect()
        };
        let train = tokens("overlap_00");
        let test = tokens(&target.name);
        let tfidf = TfidfVectorizer::fit(train.iter().map(|t| t.0.as_slice()), 2).unwrap();
        let xs: Vec<_> = train.iter().map(|t| tfidf.transform(&t.0)).collect();
        let ys: Vec<Label> = train.iter().map(|t| t.1).collect();
        let model = train_classifier(&xs, &ys, &SvmConfig::default(), seed).unwrap();
        let xt: Vec<_> = test.iter().map(|t| tfidf.transform(&t.0)).collect();
        let yt: Vec<Label> = test.iter().map(|t| t.1).collect();
        accs.push(evaluate(&model, &xt, &yt).unwrap());
    }
    let m = mean(&accs);
    assert!((m - 1.0 / 3.0).abs() < 0.05, "{m} from {accs:?}");
}

#[test]
fn subset_selection_lowers_divergence_versus_random() {
    let mut wins = Vec::new();
    for seed in 0..10 {
        let (sources, target) = graded_specs(seed);
        let corpus = generate(&sources, &target).unwrap();
        let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
        let pool = Pool::from_corpus(&corpus, &target.name, true);
        let counts: Vec<_> = (0..pool.len()).map(|p| features.counts[pool.corpus_index(p)].clone()).collect();
        let t_idx = corpus.domain_indices(&target.name);
        let t = term_distribution(t_idx.iter().map(|&i| &features.counts[i]), features.vocab.len());
        let scorer = TermJsScorer::new(&counts, &t);
        let pooled_js = |strategy| {
            let config = SelectionConfig { n: 300, strategy, m: 50, seed, ..Default::default() };
            let r = select(&pool, &config, Some(&scorer)).unwrap();
            let d = term_distribution(r.pool_positions.iter().map(|&p| &counts[p]), features.vocab.len());
            js_divergence(&d, &t).unwrap().value
        };
        wins.push((pooled_js(Strategy::Subset), pooled_js(Strategy::Random)));
    }
    let subset = mean(&wins.iter().map(|w| w.0).collect::<Vec<_>>());
    let random = mean(&wins.iter().map(|w| w.1).collect::<Vec<_>>());
    assert!(subset <= random, "subset {subset} vs random {random}");
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = [
        DomainSpec { name: "Upper".into(), ..DomainSpec::default() },
        DomainSpec { overlap: 1.5, ..DomainSpec::default() },
        DomainSpec { label_noise: 0.5, ..DomainSpec::default() },
        DomainSpec { doc_len_min: 9, doc_len_max: 3, ..DomainSpec::default() },
        DomainSpec { subtopics: 30, ..DomainSpec::default() },
    ];
    for spec in bad {
        assert!(spec.validate().is_err(), "{spec:?}");
    }
    let dup = [small("a", 0.0, 0)];
    assert!(generate(&dup, &small("a", 0.0, 0)).is_err());
}
