#![allow(dead_code)]

use datamin_core::*;

pub fn quick_forest(n_trees: usize, seed: u64) -> ForestConfig {
    ForestConfig {
        n_trees,
        seed,
        ..Default::default()
    }
}

/// A small mixed-role dataset with `d` columns, cycling through the roles so
/// every fixture has at least one task, user and shared column once d >= 3.
pub fn small_spec(seed: u64, d: usize, n_rows: usize) -> SynthSpec {
    let mut counts = [0usize; 4];
    for j in 0..d {
        counts[j % 4] += 1;
    }
    SynthSpec {
        n_rows,
        n_classes: 2 + (seed % 2) as usize,
        n_users: 3 + (seed % 3) as usize,
        task_only: counts[0],
        user_only: counts[2],
        shared: counts[1],
        noise: counts[3],
        signal_strength: 0.6 + 0.1 * (seed % 4) as f64,
        seed,
    }
}

/// Exact interventional Shapley values of the forest's vote fractions for one
/// row, by enumerating every coalition against every background row.
/// Returns `phi[class][position]` and the empty-coalition value per class.
pub fn exact_shapley(forest: &Forest, x: &[f64], background: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let features = forest.trained_on().indices().to_vec();
    let k = features.len();
    let n_classes = forest.n_classes();
    let mut value = vec![vec![0.0; n_classes]; 1 << k];
    let mut votes = vec![0u32; n_classes];
    for (mask, v) in value.iter_mut().enumerate() {
        for z in background {
            let mut row = z.clone();
            for (pos, &f) in features.iter().enumerate() {
                if mask & (1 << pos) != 0 {
                    row[f] = x[f];
                }
            }
            votes.iter_mut().for_each(|c| *c = 0);
            forest.add_votes(&row, &mut votes);
            for (acc, &c) in v.iter_mut().zip(&votes) {
                *acc += c as f64 / forest.trees().len() as f64;
            }
        }
        v.iter_mut().for_each(|a| *a /= background.len() as f64);
    }
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let mut phi = vec![vec![0.0; k]; n_classes];
    for i in 0..k {
        for mask in 0..(1usize << k) {
            if mask & (1 << i) != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = fact(s) * fact(k - s - 1) / fact(k);
            for c in 0..n_classes {
                phi[c][i] += w * (value[mask | (1 << i)][c] - value[mask][c]);
            }
        }
    }
    (phi, value[0].clone())
}

pub fn rows_of(ds: &Dataset) -> Vec<Vec<f64>> {
    (0..ds.rows())
        .map(|r| {
            let mut buf = Vec::new();
            ds.row_into(r, &mut buf);
            buf
        })
        .collect()
}
