use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{FeatureColumn, Labeling};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    #[default]
    Quantile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinningSpec {
    pub bins: usize,
    pub strategy: BinStrategy,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self {
            bins: 16,
            strategy: BinStrategy::Quantile,
        }
    }
}

/// Quantile discretization. Edges sit at the empirical quantiles `j/bins`;
/// duplicate edges collapse, so heavily tied columns get fewer bins.
pub fn quantile_bins(values: &[f64], spec: &BinningSpec) -> Result<Vec<u32>> {
    if spec.bins < 2 {
        return Err(Error::InvalidParameter(format!("bins must be at least 2, got {}", spec.bins)));
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter("cannot bin an empty column".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..spec.bins).map(|j| sorted[j * n / spec.bins]).collect();
    edges.dedup();
    Ok(values
        .iter()
        .map(|&x| edges.partition_point(|&e| e <= x) as u32)
        .collect())
}

fn entropy_of_counts<I: IntoIterator<Item = usize>>(counts: I, n: usize) -> f64 {
    let n = n as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn histogram<K: std::hash::Hash + Eq, I: IntoIterator<Item = K>>(keys: I) -> HashMap<K, usize> {
    let mut h = HashMap::new();
    for k in keys {
        *h.entry(k).or_insert(0) += 1;
    }
    h
}

fn sorted_counts<K>(h: HashMap<K, usize>) -> Vec<usize> {
    let mut c: Vec<usize> = h.into_values().collect();
    c.sort_unstable();
    c
}

/// Shannon entropy in bits of the binned column.
pub fn marginal_entropy(col: &FeatureColumn, spec: &BinningSpec) -> Result<f64> {
    let bins = quantile_bins(&col.values, spec)?;
    let n = bins.len();
    Ok(entropy_of_counts(sorted_counts(histogram(bins)), n))
}

/// I(X;Y) = H(X) + H(Y) - H(X,Y) in bits, with X the binned column.
pub fn mutual_information(col: &FeatureColumn, labels: &Labeling, spec: &BinningSpec) -> Result<f64> {
    if labels.len() != col.values.len() {
        return Err(Error::LengthMismatch {
            expected: col.values.len(),
            actual: labels.len(),
        });
    }
    let bins = quantile_bins(&col.values, spec)?;
    let n = bins.len();
    let hx = entropy_of_counts(sorted_counts(histogram(bins.iter().copied())), n);
    let hy = entropy_of_counts(sorted_counts(histogram(labels.codes().iter().copied())), n);
    let hxy = entropy_of_counts(
        sorted_counts(histogram(bins.iter().copied().zip(labels.codes().iter().copied()))),
        n,
    );
    Ok((hx + hy - hxy).max(0.0))
}

fn min_max_normalize(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; v.len()]
    }
}

/// Min-max normalized utility minus min-max normalized privacy score.
/// A constant vector normalizes to 0.5 everywhere.
pub fn tradeoff_score(utility: &[f64], privacy: &[f64]) -> Result<Vec<f64>> {
    if utility.len() != privacy.len() {
        return Err(Error::LengthMismatch {
            expected: utility.len(),
            actual: privacy.len(),
        });
    }
    if utility.iter().chain(privacy).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("scores must be finite".into()));
    }
    let u = min_max_normalize(utility);
    let p = min_max_normalize(privacy);
    Ok(u.iter().zip(&p).map(|(u, p)| u - p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(values: Vec<f64>) -> FeatureColumn {
        FeatureColumn::new("x", values)
    }

    #[test]
    fn entropy_examples() {
        let spec = BinningSpec::default();
        assert_eq!(marginal_entropy(&col(vec![3.0; 20]), &spec).unwrap(), 0.0);
        let two: Vec<f64> = (0..10).map(|i| if i < 5 { -1.0 } else { 4.0 }).collect();
        assert!((marginal_entropy(&col(two), &spec).unwrap() - 1.0).abs() < 1e-12);
        let uniform: Vec<f64> = (0..1600).map(|i| i as f64 * 0.37).collect();
        assert!((marginal_entropy(&col(uniform), &spec).unwrap() - 4.0).abs() < 0.01);
    }

    #[test]
    fn mi_of_identical_binary_feature_is_one_bit() {
        let codes: Vec<u32> = (0..40).map(|i| (i % 2) as u32).collect();
        let labels = Labeling::from_codes(codes.clone(), 2).unwrap();
        let x = col(codes.iter().map(|&c| f64::from(c)).collect());
        let mi = mutual_information(&x, &labels, &BinningSpec::default()).unwrap();
        assert!((mi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bins_must_be_at_least_two() {
        let spec = BinningSpec { bins: 1, ..Default::default() };
        assert!(marginal_entropy(&col(vec![1.0, 2.0]), &spec).is_err());
    }

    #[test]
    fn tradeoff_examples() {
        assert_eq!(tradeoff_score(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(tradeoff_score(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
        // [2,4,6] -> [0,.5,1]; constant privacy -> .5
        assert_eq!(tradeoff_score(&[2.0, 4.0, 6.0], &[3.0, 3.0, 3.0]).unwrap(), vec![-0.5, 0.0, 0.5]);
        assert!(tradeoff_score(&[1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn information_inequalities(
            xs in prop::collection::vec(-50.0f64..50.0, 2..200),
            seed in 0u32..1000,
        ) {
            let n = xs.len();
            let codes: Vec<u32> = (0..n).map(|i| ((i as u32).wrapping_mul(2654435761).wrapping_add(seed) >> 7) % 3).collect();
            let labels = Labeling::from_codes(codes, 3).unwrap();
            let spec = BinningSpec::default();
            let c = col(xs);
            let hx = marginal_entropy(&c, &spec).unwrap();
            let hy = entropy_of_counts(sorted_counts(histogram(labels.codes().iter().copied())), n);
            let mi = mutual_information(&c, &labels, &spec).unwrap();
            prop_assert!(hx >= 0.0);
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= hx.min(hy) + 1e-9);
        }
    }
}
