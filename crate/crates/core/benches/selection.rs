//! Selection throughput on one thread versus the default rayon pool.
//!
//! `cargo bench -p datasel-core` compares both inside the parallel build;
//! `cargo bench -p datasel-core --no-default-features` measures the
//! sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use datasel::evaluation::{CorpusFeatures, FeatureOptions};
use datasel::selection::{select, RepresentationKind, SelectionConfig, Strategy};
use datasel::similarity::Metric;
use datasel::synthetic::{generate, graded_specs};

fn bench_selection(c: &mut Criterion) {
    let (sources, target) = graded_specs(0);
    let corpus = generate(&sources, &target).unwrap();
    let features = CorpusFeatures::new(&corpus, &FeatureOptions::default());
    let view = features.target_view(&target.name).unwrap();
    let scorer = view.scorer(RepresentationKind::TermDist, Metric::JensenShannon, 0).unwrap();

    let pools: Vec<(&str, Option<rayon::ThreadPool>)> = if datasel::par::is_parallel() {
        vec![
            ("threads=1", Some(rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())),
            ("threads=default", None),
        ]
    } else {
        vec![("sequential", None)]
    };

    let mut group = c.benchmark_group("selection");
    group.sample_size(10);
    for (strategy, m) in [(Strategy::Instance, 0), (Strategy::Subset, 500)] {
        let config = SelectionConfig { n: 500, strategy, s: 20, m: m.max(1), seed: 1, ..Default::default() };
        for (label, pool) in &pools {
            let run = || select(view.pool(), &config, Some(scorer.as_ref())).unwrap();
            group.bench_function(BenchmarkId::new(strategy.to_string(), label), |b| match pool {
                Some(p) => b.iter(|| p.install(run)),
                None => b.iter(run),
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_selection);
criterion_main!(benches);
