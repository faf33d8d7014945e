use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use datamin_core::{
    evaluate_pair, exhaustive_search, generate, shapley, split, train, BaseAccuracy, FeatureSubset, ForestConfig,
    ShapConfig, SplitSpec, SynthSpec, Target, ThresholdPolicy,
};

fn forest(n_trees: usize) -> ForestConfig {
    ForestConfig {
        n_trees,
        seed: 1,
        ..ForestConfig::default()
    }
}

fn forest_training(c: &mut Criterion) {
    let ds = generate(&SynthSpec::dense(1)).unwrap();
    let all = FeatureSubset::full(ds.n_features()).unwrap();
    let mut group = c.benchmark_group("train");
    for trees in [10, 50] {
        group.bench_with_input(BenchmarkId::from_parameter(trees), &trees, |b, &t| {
            b.iter(|| train(black_box(&ds), Target::Task, &all, &forest(t)).unwrap())
        });
    }
    group.finish();
    c.bench_function("evaluate_pair/20 trees", |b| {
        b.iter(|| evaluate_pair(black_box(&ds), &all, &SplitSpec::default(), &forest(20)).unwrap())
    });
}

fn exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive");
    group.sample_size(10);
    for d in [4usize, 6] {
        let spec = SynthSpec {
            n_rows: 300,
            task_only: d / 2,
            user_only: 1,
            shared: 0,
            noise: d - d / 2 - 1,
            ..SynthSpec::dense(2)
        };
        let ds = generate(&spec).unwrap();
        let policy = ThresholdPolicy::new(0.01, BaseAccuracy::MaxOverSubsets).unwrap();
        let all = FeatureSubset::full(d).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| exhaustive_search(&ds, &all, &policy, &SplitSpec::default(), &forest(10)).unwrap())
        });
    }
    group.finish();
}

fn shap(c: &mut Criterion) {
    let ds = generate(&SynthSpec::dense(3)).unwrap();
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let model = train(&parts.train, Target::User, &FeatureSubset::full(ds.n_features()).unwrap(), &forest(20)).unwrap();
    let explain = parts.test.select_rows(&(0..16).collect::<Vec<_>>());
    let mut group = c.benchmark_group("shapley");
    group.sample_size(10);
    for permutations in [10, 50] {
        let cfg = ShapConfig {
            permutations,
            max_background: 64,
            ..ShapConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(permutations), &cfg, |b, cfg| {
            b.iter(|| shapley(&model, &explain, &parts.train, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, forest_training, exhaustive, shap);
criterion_main!(benches);
