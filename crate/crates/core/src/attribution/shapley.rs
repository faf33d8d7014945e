//! Monte Carlo permutation-sampling Shapley values with interventional
//! feature replacement from a background sample.
//!
//! The model output is the per-class vote fraction of a forest. For each
//! sampled permutation a background row `z` is taken and the explained row's
//! features are switched in one at a time in permutation order; the change in
//! output is credited to the feature just switched. Permutations are drawn in
//! antithetic pairs (a random order followed by its reverse) and both members
//! of a pair share the same background row.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Forest;
use crate::seed;
use crate::tabular::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapConfig {
    pub permutations: usize,
    pub seed: u64,
    /// Cap on background rows drawn from the training partition.
    pub max_background: usize,
    /// Cap on explained rows when scoring features.
    pub max_rows: usize,
}

impl Default for ShapConfig {
    fn default() -> Self {
        Self {
            permutations: 100,
            seed: 0,
            max_background: 256,
            max_rows: 256,
        }
    }
}

/// Signed contributions indexed by (row, class, feature position within the
/// forest's `trained_on`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapAttribution {
    pub features: Vec<usize>,
    pub n_rows: usize,
    pub n_classes: usize,
    pub values: Vec<f64>,
    /// Mean model output per class over the background sample.
    pub baseline: Vec<f64>,
}

impl ShapAttribution {
    #[inline]
    pub fn get(&self, row: usize, class: usize, feature_pos: usize) -> f64 {
        let k = self.features.len();
        self.values[(row * self.n_classes + class) * k + feature_pos]
    }

    /// Sum of contributions plus baseline for one (row, class).
    pub fn reconstructed(&self, row: usize, class: usize) -> f64 {
        let k = self.features.len();
        let start = (row * self.n_classes + class) * k;
        self.values[start..start + k].iter().sum::<f64>() + self.baseline[class]
    }

    /// Per feature: mean over rows of the max over classes of |value|.
    pub fn mean_max_abs(&self) -> Vec<f64> {
        let k = self.features.len();
        let mut out = vec![0.0; k];
        for row in 0..self.n_rows {
            for (pos, o) in out.iter_mut().enumerate() {
                let m = (0..self.n_classes)
                    .map(|c| self.get(row, c, pos).abs())
                    .fold(0.0, f64::max);
                *o += m;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.n_rows.max(1) as f64);
        out
    }
}

/// Deterministic subset of at most `limit` rows (sorted), keyed by `seed`.
pub(crate) fn sample_rows(ds: &Dataset, limit: usize, seed: u64) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..ds.rows()).collect();
    if rows.len() > limit {
        rows.shuffle(&mut seed::rng(seed));
        rows.truncate(limit);
        rows.sort_unstable();
    }
    rows
}

pub(crate) fn explained_rows(test: &Dataset, cfg: &ShapConfig) -> Dataset {
    let rows = sample_rows(test, cfg.max_rows, seed::mix(cfg.seed, 0xE7));
    test.select_rows(&rows)
}

/// Shapley attribution of `forest` on every row of `explain`.
///
/// `background` supplies the reference distribution (at most
/// `cfg.max_background` rows of it are used). Rows are processed in parallel;
/// each row draws from its own stream keyed by `(cfg.seed, row)` and vote
/// differences are accumulated as integers, so results do not depend on the
/// thread count.
pub fn shapley(forest: &Forest, explain: &Dataset, background: &Dataset, cfg: &ShapConfig) -> Result<ShapAttribution> {
    if cfg.permutations == 0 {
        return Err(Error::InvalidParameter("permutations must be at least 1".into()));
    }
    if cfg.max_background == 0 {
        return Err(Error::InvalidParameter("max_background must be at least 1".into()));
    }
    forest.check_compatible(explain)?;
    forest.check_compatible(background)?;

    let n_classes = forest.n_classes();
    let n_trees = forest.trees().len();
    let features = forest.trained_on().indices().to_vec();
    let k = features.len();

    let mut bg_rows: Vec<Vec<f64>> = sample_rows(background, cfg.max_background, seed::mix(cfg.seed, 0xB6))
        .into_iter()
        .map(|r| {
            let mut buf = Vec::new();
            background.row_into(r, &mut buf);
            buf
        })
        .collect();
    bg_rows.shuffle(&mut seed::rng(seed::mix(cfg.seed, 0xB7)));

    let mut baseline = vec![0.0; n_classes];
    let mut votes = vec![0u32; n_classes];
    for z in &bg_rows {
        votes.iter_mut().for_each(|v| *v = 0);
        forest.add_votes(z, &mut votes);
        for (b, &v) in baseline.iter_mut().zip(&votes) {
            *b += f64::from(v);
        }
    }
    let denom = (bg_rows.len() * n_trees) as f64;
    baseline.iter_mut().for_each(|b| *b /= denom);

    let per_row: Vec<Vec<f64>> = (0..explain.rows())
        .into_par_iter()
        .map(|row| {
            let mut x = Vec::new();
            explain.row_into(row, &mut x);
            let mut rng = seed::rng(seed::mix(seed::mix(cfg.seed, 0x5A), row as u64));
            let mut acc = vec![0i64; n_classes * k];
            let mut perm: Vec<usize> = (0..k).collect();
            let mut cur = vec![0.0; x.len()];
            let mut prev = vec![0u32; n_classes];
            let mut next = vec![0u32; n_classes];
            for p in 0..cfg.permutations {
                if p % 2 == 0 {
                    perm.shuffle(&mut rng);
                } else {
                    perm.reverse();
                }
                let z = &bg_rows[(p / 2) % bg_rows.len()];
                cur.copy_from_slice(z);
                prev.iter_mut().for_each(|v| *v = 0);
                forest.add_votes(&cur, &mut prev);
                for &pos in &perm {
                    let f = features[pos];
                    cur[f] = x[f];
                    next.iter_mut().for_each(|v| *v = 0);
                    forest.add_votes(&cur, &mut next);
                    for c in 0..n_classes {
                        acc[c * k + pos] += i64::from(next[c]) - i64::from(prev[c]);
                    }
                    std::mem::swap(&mut prev, &mut next);
                }
            }
            let scale = (cfg.permutations * n_trees) as f64;
            acc.into_iter().map(|a| a as f64 / scale).collect()
        })
        .collect();

    Ok(ShapAttribution {
        features,
        n_rows: explain.rows(),
        n_classes,
        values: per_row.concat(),
        baseline,
    })
}
