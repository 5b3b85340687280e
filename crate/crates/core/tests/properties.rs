use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

use datasel::autoencoder::AeModel;
use datasel::corpus::{Corpus, Document, Label, SparseCounts};
use datasel::evaluation::{evaluate, t_test, train_classifier, SvmConfig};
use datasel::representations::{term_distribution, TermDistribution};
use datasel::rng;
use datasel::selection::{
    balanced_quotas, select, DenseCosineScorer, Pool, RepresentationKind, SelectionConfig, Strategy as Level,
    SubsetScorer,
    TermJsScorer,
};
use datasel::similarity::{cosine_raw, js_divergence_raw, JsReference, Metric};
use datasel::sparse::{Row, SparseVec};

fn distribution() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 2..24)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    v[0] += 1e-3;
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    distribution().prop_flat_map(|p| {
        let n = p.len();
        (Just(normalize(p)), prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], n).prop_map(normalize))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn js_is_symmetric_bounded_and_zero_only_on_equality((p, q) in pair()) {
        let a = js_divergence_raw(&p, &q);
        let b = js_divergence_raw(&q, &p);
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-15).contains(&a));
        prop_assert_eq!(js_divergence_raw(&p, &p), 0.0);
        if p != q {
            let gap = p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if gap > 1e-6 {
                prop_assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn sparse_js_reference_matches_dense((p, q) in pair()) {
        let reference = JsReference::new(&TermDistribution::from_probs(q.clone()));
        let sparse = reference.divergence(p.iter().copied().enumerate().filter(|x| x.1 > 0.0));
        prop_assert!((sparse - js_divergence_raw(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn cosine_is_symmetric_and_bounded(a in prop::collection::vec(-5.0..5.0f64, 1..16), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let b: Vec<f64> = a.iter().map(|_| r.gen_range(-5.0..5.0)).collect();
        let x = cosine_raw(&a, &b).unwrap();
        prop_assert_eq!(x, cosine_raw(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&x));
    }

    #[test]
    fn sparse_and_dense_rows_agree(v in prop::collection::vec(prop_oneof![Just(0.0), -3.0..3.0f64], 1..32), seed in any::<u64>()) {
        let s = SparseVec::from_dense(&v);
        prop_assert_eq!(s.to_dense(), v.clone());
        let mut r = rng::seeded(seed);
        let w: Vec<f64> = v.iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        let dense: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        prop_assert!((s.dot(&w) - dense).abs() < 1e-12);
        prop_assert!((Row::dot(&v, &w) - dense).abs() < 1e-12);
        prop_assert!((s.norm() - v.iter().map(|x| x * x).sum::<f64>().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn autoencoder_sparse_and_dense_encodings_agree(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let m = AeModel::init(9, 4, &mut r);
        let x: Vec<f64> = (0..9).map(|_| if r.gen_bool(0.5) { 0.0 } else { r.gen::<f64>() }).collect();
        let a = m.encode(&x).unwrap();
        let b = m.encode_sparse(&SparseVec::from_dense(&x)).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn quotas_fill_up_to_capacity(caps in prop::collection::vec(0usize..50, 1..8), n in 0usize..300) {
        let q = balanced_quotas(&caps, n);
        let total: usize = caps.iter().sum();
        prop_assert_eq!(q.iter().sum::<usize>(), n.min(total));
        for (a, c) in q.iter().zip(&caps) {
            prop_assert!(a <= c);
        }
        // Unsaturated domains get at least the even share.
        for (a, c) in q.iter().zip(&caps) {
            if a < c {
                prop_assert!(*a >= n / caps.len());
            }
        }
    }

    #[test]
    fn t_test_is_antisymmetric(
        a in prop::collection::vec(0.0..1.0f64, 2..12),
        b in prop::collection::vec(0.0..1.0f64, 2..12),
    ) {
        let ab = t_test(&a, &b).unwrap();
        let ba = t_test(&b, &a).unwrap();
        prop_assert!((ab.t + ba.t).abs() < 1e-9 * ab.t.abs().max(1.0));
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert_eq!(ab.df, a.len() + b.len() - 2);
    }

    #[test]
    fn accuracy_ignores_evaluation_order(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let labels = [Label::Negative, Label::Neutral, Label::Positive];
        let xs: Vec<SparseVec> = (0..60)
            .map(|_| SparseVec::from_dense(&(0..5).map(|_| r.gen::<f64>()).collect::<Vec<_>>()))
            .collect();
        let ys: Vec<Label> = (0..60).map(|_| labels[r.gen_range(0..3)]).collect();
        let model = train_classifier(&xs, &ys, &SvmConfig::default(), seed).unwrap();
        let acc = evaluate(&model, &xs, &ys).unwrap();
        let mut order: Vec<usize> = (0..60).collect();
        order.shuffle(&mut r);
        let xs2: Vec<SparseVec> = order.iter().map(|&i| xs[i].clone()).collect();
        let ys2: Vec<Label> = order.iter().map(|&i| ys[i]).collect();
        prop_assert_eq!(evaluate(&model, &xs2, &ys2).unwrap(), acc);
    }
}

// ---- selection ----

struct Fixture {
    corpus: Corpus,
    pool: Pool,
    counts: Vec<SparseCounts>,
    vectors: Vec<Vec<f64>>,
    target: TermDistribution,
    target_vec: Vec<f64>,
}

/// A corpus with four source domains and a target, random non-empty term
/// counts and random dense vectors for every pool item.
fn fixture(seed: u64, per_domain: usize) -> Fixture {
    let mut r = rng::seeded(seed);
    let vocab = 20;
    let mut docs = Vec::new();
    for d in ["src_a", "src_b", "src_c", "src_d", "tgt"] {
        for k in 0..per_domain {
            docs.push(Document {
                id: format!("{d}-{k:03}"),
                text: String::new(),
                domain: d.into(),
                label: Some(Label::Positive),
            });
        }
    }
    let corpus = Corpus::new(docs).unwrap();
    let pool = Pool::from_corpus(&corpus, "tgt", true);
    let draw = |r: &mut rng::Rng| {
        let mut pairs = Vec::new();
        for i in 0..vocab as u32 {
            if r.gen_bool(0.25) {
                pairs.push((i, r.gen_range(1..4)));
            }
        }
        if pairs.is_empty() {
            pairs.push((r.gen_range(0..vocab as u32), 1));
        }
        let total = pairs.iter().map(|p: &(u32, u32)| u64::from(p.1)).sum();
        SparseCounts::new(pairs, total)
    };
    let counts: Vec<SparseCounts> = (0..pool.len()).map(|_| draw(&mut r)).collect();
    let target_counts: Vec<SparseCounts> = (0..per_domain).map(|_| draw(&mut r)).collect();
    let vectors = (0..pool.len()).map(|_| (0..6).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    let target_vec = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
    Fixture { target: term_distribution(target_counts.iter(), vocab), corpus, pool, counts, vectors, target_vec }
}

fn scorers(f: &Fixture) -> Vec<Box<dyn SubsetScorer + '_>> {
    vec![
        Box::new(TermJsScorer::new(&f.counts, &f.target)),
        Box::new(DenseCosineScorer::new(&f.vectors, f.target_vec.clone())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selections_are_exact_unique_and_leak_free(
        seed in any::<u64>(),
        n in 1usize..90,
        s in 1usize..9,
        strategy in prop::sample::select(vec![Level::Random, Level::Balanced, Level::Domain, Level::Instance, Level::Subset]),
    ) {
        let f = fixture(seed, 20);
        for scorer in scorers(&f) {
            let metric = scorer.metric();
            let representation = if metric == Metric::Cosine { RepresentationKind::Embedding } else { RepresentationKind::TermDist };
            let config = SelectionConfig { n, strategy, representation, metric, s, m: 30, seed, proxy_subset: false };
            let a = select(&f.pool, &config, Some(scorer.as_ref())).unwrap();
            let b = select(&f.pool, &config, Some(scorer.as_ref())).unwrap();
            prop_assert_eq!(&a, &b);

            let expect = if strategy == Level::Domain { n.min(20) } else { n.min(f.pool.len()) };
            prop_assert_eq!(a.excluded_empty, 0);
            prop_assert_eq!(a.chosen.len(), expect);
            prop_assert_eq!(a.shortfall, n - expect);
            let unique: BTreeSet<&String> = a.chosen.iter().collect();
            prop_assert_eq!(unique.len(), a.chosen.len());
            for id in &a.chosen {
                let doc = f.corpus.get(id).unwrap();
                prop_assert_ne!(doc.domain.as_str(), "tgt");
            }
            if strategy == Level::Subset {
                let mut seen = BTreeSet::new();
                for it in &a.iterations {
                    prop_assert!(it.members.len() <= s);
                    for id in &it.members {
                        prop_assert!(seen.insert(id.clone()), "{} kept twice", id);
                    }
                }
                let chosen: BTreeSet<String> = a.chosen.iter().cloned().collect();
                prop_assert!(chosen.is_subset(&seen));
                prop_assert_eq!(a.iterations.len(), n.min(f.pool.len()).div_ceil(s));
            }
        }
    }

    #[test]
    fn exhaustive_single_item_subsets_equal_instance_level(seed in any::<u64>(), n in 1usize..60) {
        let f = fixture(seed, 12);
        for scorer in scorers(&f) {
            let base = SelectionConfig { n, s: 1, m: 1000, seed, ..Default::default() };
            let subset = select(&f.pool, &SelectionConfig { strategy: Level::Subset, ..base.clone() }, Some(scorer.as_ref())).unwrap();
            let instance = select(&f.pool, &SelectionConfig { strategy: Level::Instance, ..base }, Some(scorer.as_ref())).unwrap();
            let a: BTreeSet<String> = subset.chosen.into_iter().collect();
            let b: BTreeSet<String> = instance.chosen.into_iter().collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn different_seeds_leave_similarity_guided_ranking_unchanged(seed in any::<u64>()) {
        let f = fixture(seed, 15);
        let scorer = TermJsScorer::new(&f.counts, &f.target);
        let run = |s| select(&f.pool, &SelectionConfig { n: 25, strategy: Level::Instance, seed: s, ..Default::default() }, Some(&scorer)).unwrap().chosen;
        prop_assert_eq!(run(1), run(2));
    }
}
