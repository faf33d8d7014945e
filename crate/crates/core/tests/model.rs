mod common;

use common::*;
use datamin_core::*;
use proptest::prelude::*;

fn noise_dataset(n: usize, n_users: usize, seed: u64) -> Dataset {
    generate(&SynthSpec {
        n_rows: n,
        n_classes: 3,
        n_users,
        task_only: 0,
        user_only: 0,
        shared: 0,
        noise: 4,
        signal_strength: 1.0,
        seed,
    })
    .unwrap()
}

#[test]
fn training_is_thread_count_invariant() {
    let ds = generate(&small_spec(2, 6, 300)).unwrap();
    let all = FeatureSubset::full(6).unwrap();
    let cfg = quick_forest(16, 99);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train(&ds, Target::User, &all, &cfg).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one, many);
    assert_eq!(one.to_json().unwrap(), many.to_json().unwrap());
}

#[test]
fn adding_trees_keeps_earlier_trees() {
    let ds = generate(&small_spec(3, 5, 200)).unwrap();
    let all = FeatureSubset::full(5).unwrap();
    let small = train(&ds, Target::Task, &all, &quick_forest(4, 1)).unwrap();
    let big = train(&ds, Target::Task, &all, &quick_forest(9, 1)).unwrap();
    assert_eq!(small.trees(), &big.trees()[..4]);
}

// test partition of 1000 rows at the default 30% split
const ROWS_FOR_1000_TEST: usize = 3334;

#[test]
fn independent_users_sit_in_binomial_band() {
    let ds = noise_dataset(ROWS_FOR_1000_TEST, 9, 17);
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    assert_eq!(parts.test.rows(), 1000);
    let eval = evaluate_pair(&ds, &FeatureSubset::full(4).unwrap(), &SplitSpec::default(), &quick_forest(25, 0)).unwrap();
    let p: f64 = 1.0 / 9.0;
    let sigma = (p * (1.0 - p) / 1000.0).sqrt();
    assert!((eval.identifiability - p).abs() <= 3.0 * sigma, "{} outside {p}±{}", eval.identifiability, 3.0 * sigma);
}

#[test]
fn noise_subset_task_accuracy_near_majority_frequency() {
    let ds = noise_dataset(ROWS_FOR_1000_TEST, 4, 23);
    let eval = evaluate_pair(&ds, &FeatureSubset::full(4).unwrap(), &SplitSpec::default(), &quick_forest(25, 0)).unwrap();
    let parts = split(&ds, &SplitSpec::default()).unwrap();
    let mut counts = [0usize; 3];
    parts.test.task_labels().codes().iter().for_each(|&c| counts[c as usize] += 1);
    let p = *counts.iter().max().unwrap() as f64 / parts.test.rows() as f64;
    let sigma = (p * (1.0 - p) / parts.test.rows() as f64).sqrt();
    assert!((eval.task_accuracy - p).abs() <= 3.0 * sigma);
}

#[test]
fn duplicated_informative_feature_shares_importance() {
    let base = generate(&SynthSpec {
        n_rows: 400,
        n_classes: 2,
        n_users: 2,
        task_only: 1,
        user_only: 0,
        shared: 0,
        noise: 2,
        signal_strength: 1.0,
        seed: 4,
    })
    .unwrap();
    let mut cols = base.features().to_vec();
    cols.insert(1, FeatureColumn::new("task_copy", cols[0].values.clone()));
    let ds = base.with_features(cols).unwrap();
    let forest = train(&ds, Target::Task, &FeatureSubset::full(4).unwrap(), &quick_forest(50, 8)).unwrap();
    let imp = forest.gini_importance();
    assert!(imp[0] > 0.0 && imp[1] > 0.0, "{imp:?}");
    assert!((imp[0] + imp[1] - 1.0).abs() <= 0.1, "{imp:?}");
}

#[test]
fn pair_shares_one_config() {
    let ds = generate(&small_spec(5, 4, 120)).unwrap();
    let subset = FeatureSubset::new(vec![1, 3]).unwrap();
    let pair = train_pair(&ds, &subset, &quick_forest(5, 3)).unwrap();
    assert_eq!(pair.task.config(), pair.adversary.config());
    assert_eq!(pair.task.trained_on(), &subset);
    assert_eq!(pair.task.target(), Target::Task);
    assert_eq!(pair.adversary.target(), Target::User);
}

#[test]
fn every_split_uses_a_trained_feature() {
    let ds = generate(&small_spec(6, 7, 200)).unwrap();
    let subset = FeatureSubset::new(vec![0, 2, 5]).unwrap();
    let forest = train(&ds, Target::User, &subset, &quick_forest(10, 0)).unwrap();
    for tree in forest.trees() {
        assert!(tree.split_features().all(|f| subset.contains(f)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn importance_is_a_distribution(seed in 0u64..1000, d in 1usize..7) {
        let ds = generate(&small_spec(seed, d, 80)).unwrap();
        let forest = train(&ds, Target::Task, &FeatureSubset::full(d).unwrap(), &quick_forest(6, seed)).unwrap();
        let imp = forest.gini_importance();
        prop_assert_eq!(imp.len(), d);
        prop_assert!(imp.iter().all(|&w| w >= 0.0));
        prop_assert!((imp.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn accuracies_are_fractions(seed in 0u64..1000, d in 1usize..6) {
        let ds = generate(&small_spec(seed, d, 60)).unwrap();
        let mask = (seed as usize % ((1 << d) - 1)) + 1;
        let subset = FeatureSubset::new((0..d).filter(|b| mask & (1 << b) != 0).collect()).unwrap();
        let e = evaluate_pair(&ds, &subset, &SplitSpec::default(), &quick_forest(4, seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.task_accuracy));
        prop_assert!((0.0..=1.0).contains(&e.identifiability));
        let again = evaluate_pair(&ds, &subset, &SplitSpec::default(), &quick_forest(4, seed)).unwrap();
        prop_assert_eq!(e, again);
    }

    #[test]
    fn label_copy_never_lowers_training_accuracy(seed in 0u64..1000, d in 1usize..5) {
        let spec = SynthSpec { n_classes: 2, ..small_spec(seed, d, 80) };
        let ds = generate(&spec).unwrap();
        let copy = FeatureColumn::new("label", ds.task_labels().codes().iter().map(|&c| c as f64).collect());
        let mut cols = vec![copy];
        cols.extend(ds.features().iter().cloned());
        let with_copy = ds.with_features(cols).unwrap();
        let cfg = ForestConfig { features_per_split: FeaturesPerSplit::All, ..quick_forest(5, seed) };
        let without = train(&ds, Target::Task, &FeatureSubset::full(d).unwrap(), &cfg).unwrap();
        let with = train(&with_copy, Target::Task, &FeatureSubset::full(d + 1).unwrap(), &cfg).unwrap();
        prop_assert!(accuracy(&with, &with_copy).unwrap() >= accuracy(&without, &ds).unwrap());
    }
}
