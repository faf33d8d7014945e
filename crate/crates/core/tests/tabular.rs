mod common;

use common::*;
use datamin_core::tabular::{split_indices, write_csv};
use datamin_core::*;
use proptest::prelude::*;

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (5usize..120, 1usize..6, 2usize..4, 2usize..5, any::<u64>()).prop_map(|(n, d, k, u, seed)| {
        generate(&SynthSpec {
            n_classes: k,
            n_users: u,
            ..small_spec(seed, d, n)
        })
        .unwrap()
    })
}

proptest! {
    #[test]
    fn split_partitions_rows(ds in arb_dataset(), frac in 0.1f64..0.9, seed in any::<u64>(), on in 0u8..3) {
        let stratify_on = [Stratify::Task, Stratify::User, Stratify::Joint][on as usize];
        let spec = SplitSpec { test_fraction: frac, seed, stratify_on };
        match split_indices(&ds, &spec) {
            Ok(idx) => {
                prop_assert!(!idx.train.is_empty() && !idx.test.is_empty());
                let mut all: Vec<usize> = idx.train.iter().chain(&idx.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..ds.rows()).collect::<Vec<_>>());
                prop_assert!(idx.train.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(split_indices(&ds, &spec).unwrap(), idx);
            }
            Err(e) => prop_assert!(matches!(e, Error::DegenerateSplit(_)), "{e:?}"),
        }
    }

    #[test]
    fn split_keeps_class_proportions(seed in any::<u64>(), frac in 0.2f64..0.5) {
        let ds = generate(&SynthSpec { n_classes: 3, ..small_spec(seed, 2, 300) }).unwrap();
        let idx = split_indices(&ds, &SplitSpec { test_fraction: frac, seed, stratify_on: Stratify::Task }).unwrap();
        for class in 0..3u32 {
            let total = ds.task_labels().codes().iter().filter(|&&c| c == class).count();
            let in_test = idx.test.iter().filter(|&&r| ds.task_labels().codes()[r] == class).count();
            prop_assert_eq!(in_test, (frac * total as f64).round() as usize);
        }
    }

    #[test]
    fn projection_keeps_rows_and_order(ds in arb_dataset(), mask in 1u64..64) {
        let d = ds.n_features();
        let indices: Vec<usize> = (0..d).filter(|b| mask & (1 << b) != 0).collect();
        prop_assume!(!indices.is_empty());
        let subset = FeatureSubset::new(indices.clone()).unwrap();
        let p = project(&ds, &subset).unwrap();
        prop_assert_eq!(p.rows(), ds.rows());
        prop_assert_eq!(p.n_features(), indices.len());
        for (j, &f) in indices.iter().enumerate() {
            prop_assert_eq!(p.feature(j), ds.feature(f));
        }
        prop_assert_eq!(p.task_labels(), ds.task_labels());
        prop_assert_eq!(p.user_labels(), ds.user_labels());
    }

    #[test]
    fn csv_round_trip(ds in arb_dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, "task", "user").unwrap();
        let back = tabular::read_csv(buf.as_slice(), "task", "user", NaPolicy::Error).unwrap();
        prop_assert_eq!(back.features(), ds.features());
        prop_assert_eq!(back.task_labels().classes(), ds.task_labels().classes());
        prop_assert_eq!(back.task_labels().codes(), ds.task_labels().codes());
        prop_assert_eq!(back.user_labels().codes(), ds.user_labels().codes());
    }
}

#[test]
fn out_of_range_subset_is_rejected() {
    let ds = generate(&small_spec(0, 3, 40)).unwrap();
    assert!(matches!(
        project(&ds, &FeatureSubset::new(vec![0, 3]).unwrap()),
        Err(Error::IndexOutOfRange { index: 3, n_features: 3 })
    ));
    assert!(FeatureSubset::new(vec![]).is_err());
    assert!(FeatureSubset::new(vec![2, 1]).is_err());
}
