//! Synthetic datasets with planted feature roles, and a brute-force
//! enumeration oracle used to cross-check the solvers.
//!
//! A label-dependent feature emits its label's index plus uniform jitter in
//! `[0,1)` with probability `signal_strength`, and otherwise a uniform draw
//! over the label's index range. Shared features encode the joint index
//! `task * n_users + user`.

use std::cmp::Ordering;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate_pair, ForestConfig};
use crate::seed;
use crate::tabular::{Dataset, FeatureColumn, FeatureSubset, Labeling, SplitSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    TaskOnly,
    UserOnly,
    Shared,
    Noise,
}

impl Role {
    fn prefix(self) -> &'static str {
        match self {
            Role::TaskOnly => "task",
            Role::UserOnly => "user",
            Role::Shared => "shared",
            Role::Noise => "noise",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_classes: usize,
    pub n_users: usize,
    pub task_only: usize,
    pub user_only: usize,
    pub shared: usize,
    pub noise: usize,
    pub signal_strength: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Dense preset: 20 features, 4 of them user-only.
    pub fn dense(seed: u64) -> Self {
        Self {
            n_rows: 600,
            n_classes: 3,
            n_users: 6,
            task_only: 8,
            user_only: 4,
            shared: 2,
            noise: 6,
            signal_strength: 0.9,
            seed,
        }
    }

    /// Sparse preset: 200 weak features that each carry a little of both
    /// labelings.
    pub fn sparse(seed: u64) -> Self {
        Self {
            n_rows: 2000,
            n_classes: 3,
            n_users: 6,
            task_only: 0,
            user_only: 0,
            shared: 200,
            noise: 0,
            signal_strength: 0.2,
            seed,
        }
    }

    /// Dense counterpart of [`SynthSpec::sparse`]: 20 features whose signal
    /// strength is set so the full-feature task accuracy lands near the
    /// sparse preset's.
    pub fn dense_matched(seed: u64) -> Self {
        Self {
            n_rows: 2000,
            n_classes: 3,
            n_users: 6,
            task_only: 4,
            user_only: 4,
            shared: 2,
            noise: 10,
            signal_strength: 0.45,
            seed,
        }
    }

    pub fn n_features(&self) -> usize {
        self.task_only + self.user_only + self.shared + self.noise
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features() == 0 {
            return Err(Error::InvalidParameter("spec has no features".into()));
        }
        if self.n_classes < 2 || self.n_users < 2 {
            return Err(Error::InvalidParameter("need at least 2 classes and 2 users".into()));
        }
        if self.n_rows < 2 {
            return Err(Error::InvalidParameter("need at least 2 rows".into()));
        }
        if !(self.signal_strength > 0.0 && self.signal_strength <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "signal_strength must lie in (0,1], got {}",
                self.signal_strength
            )));
        }
        Ok(())
    }

    /// Role of every generated column, in column order.
    pub fn roles(&self) -> Vec<Role> {
        [
            (Role::TaskOnly, self.task_only),
            (Role::UserOnly, self.user_only),
            (Role::Shared, self.shared),
            (Role::Noise, self.noise),
        ]
        .into_iter()
        .flat_map(|(r, n)| std::iter::repeat_n(r, n))
        .collect()
    }

    pub fn features_with_role(&self, role: Role) -> Vec<usize> {
        self.roles()
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == role)
            .map(|(i, _)| i)
            .collect()
    }
}

fn balanced_labels(n: usize, k: usize, seed: u64) -> Vec<u32> {
    let mut labels: Vec<u32> = (0..n).map(|i| (i % k) as u32).collect();
    labels.shuffle(&mut seed::rng(seed));
    labels
}

/// Generates a dataset; identical specs give identical datasets.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_rows;
    let task = balanced_labels(n, spec.n_classes, seed::mix(spec.seed, 1));
    let user = balanced_labels(n, spec.n_users, seed::mix(spec.seed, 2));
    let mut counters = [0usize; 4];
    let features = spec
        .roles()
        .into_iter()
        .enumerate()
        .map(|(j, role)| {
            let slot = role as usize;
            let name = format!("{}_{}", role.prefix(), counters[slot]);
            counters[slot] += 1;
            let mut rng = seed::rng(seed::mix(spec.seed, 1000 + j as u64));
            let (range, label): (usize, Box<dyn Fn(usize) -> usize>) = match role {
                Role::TaskOnly => (spec.n_classes, Box::new(|i| task[i] as usize)),
                Role::UserOnly => (spec.n_users, Box::new(|i| user[i] as usize)),
                Role::Shared => (
                    spec.n_classes * spec.n_users,
                    Box::new(|i| task[i] as usize * spec.n_users + user[i] as usize),
                ),
                Role::Noise => (spec.n_classes.max(spec.n_users), Box::new(|_| 0)),
            };
            let values = (0..n)
                .map(|i| {
                    let signal = role != Role::Noise && rng.random::<f64>() < spec.signal_strength;
                    if signal {
                        label(i) as f64 + rng.random::<f64>()
                    } else {
                        rng.random::<f64>() * range as f64
                    }
                })
                .collect();
            FeatureColumn::new(name, values)
        })
        .collect();
    Dataset::new(
        features,
        Labeling::from_codes(task, spec.n_classes)?,
        Labeling::from_codes(user, spec.n_users)?,
    )
}

pub const ORACLE_MAX_FEATURES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub subset: Vec<usize>,
    pub task_accuracy: f64,
    pub identifiability: f64,
}

/// Every non-empty subset's accuracies, from a plain sequential loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleTable {
    pub n_features: usize,
    pub entries: Vec<OracleEntry>,
}

/// Enumerates all `2^d - 1` subsets one at a time, calling
/// [`evaluate_pair`] (which re-splits the data) for each.
pub fn oracle_enumerate(ds: &Dataset, split_spec: &SplitSpec, cfg: &ForestConfig) -> Result<OracleTable> {
    let d = ds.n_features();
    if d > ORACLE_MAX_FEATURES {
        return Err(Error::CapExceeded {
            requested: d,
            cap: ORACLE_MAX_FEATURES,
        });
    }
    let mut entries = Vec::with_capacity((1 << d) - 1);
    for mask in 1u32..(1u32 << d) {
        let mut subset = Vec::new();
        for bit in 0..d {
            if mask & (1 << bit) != 0 {
                subset.push(bit);
            }
        }
        let eval = evaluate_pair(ds, &FeatureSubset::new(subset.clone())?, split_spec, cfg)?;
        entries.push(OracleEntry {
            subset,
            task_accuracy: eval.task_accuracy,
            identifiability: eval.identifiability,
        });
    }
    Ok(OracleTable { n_features: d, entries })
}

impl OracleTable {
    fn base_accuracy(&self, full_set_base: bool) -> f64 {
        if full_set_base {
            self.entries
                .iter()
                .find(|e| e.subset.len() == self.n_features)
                .map(|e| e.task_accuracy)
                .unwrap_or(0.0)
        } else {
            let mut best = 0.0;
            for e in &self.entries {
                if e.task_accuracy > best {
                    best = e.task_accuracy;
                }
            }
            best
        }
    }

    /// All feasible entries at `threshold`, best first: identifiability
    /// ascending, fewer features, higher accuracy, lexicographic.
    pub fn ranked(&self, threshold: f64, full_set_base: bool) -> Vec<&OracleEntry> {
        let bound = (1.0 - threshold) * self.base_accuracy(full_set_base);
        let mut feasible: Vec<&OracleEntry> = self.entries.iter().filter(|e| e.task_accuracy >= bound).collect();
        feasible.sort_by(|a, b| {
            if a.identifiability != b.identifiability {
                return a.identifiability.partial_cmp(&b.identifiability).unwrap_or(Ordering::Equal);
            }
            if a.subset.len() != b.subset.len() {
                return a.subset.len().cmp(&b.subset.len());
            }
            if a.task_accuracy != b.task_accuracy {
                return b.task_accuracy.partial_cmp(&a.task_accuracy).unwrap_or(Ordering::Equal);
            }
            a.subset.cmp(&b.subset)
        });
        feasible
    }

    pub fn argmin(&self, threshold: f64, full_set_base: bool) -> &OracleEntry {
        self.ranked(threshold, full_set_base)[0]
    }

    pub fn entry(&self, subset: &[usize]) -> Option<&OracleEntry> {
        self.entries.iter().find(|e| e.subset == subset)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
