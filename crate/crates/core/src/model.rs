//! Random forest of Gini-split decision trees.
//!
//! One trainer serves both the provider's task model and the adversary's
//! user-classification model; [`evaluate_pair`] trains the two with a single
//! shared [`ForestConfig`].

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{split, Dataset, FeatureSubset, Partitions, SplitSpec, Target};

/// How many candidate features each split examines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    /// `ceil(sqrt(d))`
    #[default]
    Sqrt,
    All,
    Fixed(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            FeaturesPerSplit::Sqrt => (d as f64).sqrt().ceil() as usize,
            FeaturesPerSplit::All => d,
            FeaturesPerSplit::Fixed(m) => m,
        };
        m.clamp(1, d.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be positive".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParameter(
                "min_samples_split must be at least 2".into(),
            ));
        }
        if self.features_per_split == FeaturesPerSplit::Fixed(0) {
            return Err(Error::InvalidParameter(
                "features_per_split must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Config used for both models when evaluating `subset`; the seed is
    /// keyed by the subset so results do not depend on evaluation order.
    pub fn for_subset(&self, subset: &FeatureSubset) -> Self {
        Self {
            seed: seed::mix_indices(self.seed, subset.indices()),
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf {
        counts: Vec<u32>,
        class: u32,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Weighted impurity decrease: (n_node / n_root) * (gini - child gini).
        gain: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    #[inline]
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class, .. } => return *class as usize,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Features used by split nodes, with repetition.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

fn argmax_first(counts: &[u32]) -> u32 {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best as u32
}

fn gini(counts: &[u32], n: usize) -> f64 {
    let n = n as f64;
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    1.0 - sq / (n * n)
}

struct Grower<'a> {
    ds: &'a Dataset,
    labels: &'a [u32],
    n_classes: usize,
    candidates: &'a [usize],
    mtry: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
    n_root: f64,
    nodes: Vec<Node>,
    order: Vec<usize>,
    scratch: Vec<(f64, u32)>,
    left_counts: Vec<u32>,
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.impurity, self.feature, self.threshold) < (other.impurity, other.feature, other.threshold)
    }
}

impl Grower<'_> {
    fn grow<R: Rng>(&mut self, samples: &mut [usize], depth: usize, rng: &mut R) -> u32 {
        let mut counts = vec![0u32; self.n_classes];
        for &s in samples.iter() {
            counts[self.labels[s] as usize] += 1;
        }
        let m = samples.len();
        let impurity = gini(&counts, m);
        let stop = impurity <= 0.0
            || m < self.min_samples_split
            || self.max_depth.is_some_and(|d| depth >= d);
        let best = if stop { None } else { self.best_split(samples, &counts, rng) };
        let Some(best) = best else {
            let class = argmax_first(&counts);
            self.nodes.push(Node::Leaf { counts, class });
            return (self.nodes.len() - 1) as u32;
        };

        let mut lo = 0;
        let mut hi = m;
        while lo < hi {
            if self.ds.value(samples[lo], best.feature) <= best.threshold {
                lo += 1;
            } else {
                hi -= 1;
                samples.swap(lo, hi);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            counts: Vec::new(),
            class: 0,
        });
        let (l, r) = samples.split_at_mut(lo);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: (m as f64 / self.n_root) * (impurity - best.impurity),
            left,
            right,
        };
        id as u32
    }

    fn best_split<R: Rng>(&mut self, samples: &[usize], counts: &[u32], rng: &mut R) -> Option<Candidate> {
        self.order.clear();
        self.order.extend_from_slice(self.candidates);
        self.order.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut examined = 0;
        for k in 0..self.order.len() {
            if examined == self.mtry {
                break;
            }
            let feature = self.order[k];
            if let Some(c) = self.best_split_on(feature, samples, counts) {
                examined += 1;
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Best midpoint threshold on one feature; `None` when the feature is
    /// constant over `samples`.
    fn best_split_on(&mut self, feature: usize, samples: &[usize], counts: &[u32]) -> Option<Candidate> {
        let col = &self.ds.feature(feature).values;
        self.scratch.clear();
        self.scratch
            .extend(samples.iter().map(|&s| (col[s], self.labels[s])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let m = self.scratch.len();
        if self.scratch[0].0 == self.scratch[m - 1].0 {
            return None;
        }
        self.left_counts.iter_mut().for_each(|c| *c = 0);
        let mut sq_left = 0.0f64;
        let mut sq_right: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m - 1 {
            let class = self.scratch[i].1 as usize;
            let lc = self.left_counts[class] as f64;
            let rc = (counts[class] - self.left_counts[class]) as f64;
            sq_left += 2.0 * lc + 1.0;
            sq_right -= 2.0 * rc - 1.0;
            self.left_counts[class] += 1;
            if self.scratch[i].0 == self.scratch[i + 1].0 {
                continue;
            }
            let nl = (i + 1) as f64;
            let nr = (m - i - 1) as f64;
            let weighted = ((nl - sq_left / nl) + (nr - sq_right / nr)) / m as f64;
            if best.is_none_or(|(b, _)| weighted < b) {
                best = Some((weighted, i));
            }
        }
        best.map(|(impurity, i)| {
            let a = self.scratch[i].0;
            let b = self.scratch[i + 1].0;
            let mut threshold = 0.5 * (a + b);
            if threshold >= b || threshold < a {
                threshold = a;
            }
            Candidate {
                impurity,
                feature,
                threshold,
            }
        })
    }
}

fn grow_tree(ds: &Dataset, labels: &[u32], n_classes: usize, subset: &FeatureSubset, cfg: &ForestConfig, tree_index: usize) -> Tree {
    let mut rng = seed::rng(seed::mix(cfg.seed, tree_index as u64));
    let n = ds.rows();
    let mut samples: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut grower = Grower {
        ds,
        labels,
        n_classes,
        candidates: subset.indices(),
        mtry: cfg.features_per_split.resolve(subset.len()),
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        n_root: samples.len() as f64,
        nodes: Vec::new(),
        order: Vec::with_capacity(subset.len()),
        scratch: Vec::with_capacity(n),
        left_counts: vec![0; n_classes],
    };
    grower.grow(&mut samples, 0, &mut rng);
    Tree { nodes: grower.nodes }
}

/// A trained forest. Trees index features by their position in the dataset
/// the forest was trained on; `trained_on` lists the features it may use.
#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    target: Target,
    class_labels: Vec<String>,
    trained_on: FeatureSubset,
    feature_names: Vec<String>,
    n_input_features: usize,
    config: ForestConfig,
    trees: Vec<Tree>,
}

/// Trains a forest predicting `target` from the features in `subset`.
///
/// Trees are grown in parallel; each tree's randomness derives only from
/// `cfg.seed` and its index, so the result is independent of thread count.
pub fn train(ds: &Dataset, target: Target, subset: &FeatureSubset, cfg: &ForestConfig) -> Result<Forest> {
    cfg.validate()?;
    subset.validate(ds.n_features())?;
    let labeling = ds.labels(target);
    let n_classes = labeling.n_classes();
    let labels = labeling.codes();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(ds, labels, n_classes, subset, cfg, t))
        .collect();
    Ok(Forest {
        target,
        class_labels: labeling.classes().to_vec(),
        trained_on: subset.clone(),
        feature_names: subset.names(ds).into_iter().map(str::to_owned).collect(),
        n_input_features: ds.n_features(),
        config: *cfg,
        trees,
    })
}

impl Forest {
    pub fn target(&self) -> Target {
        self.target
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn trained_on(&self) -> &FeatureSubset {
        &self.trained_on
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_input_features(&self) -> usize {
        self.n_input_features
    }

    /// Adds one vote per tree into `votes` (length = number of classes).
    #[inline]
    pub fn add_votes(&self, row: &[f64], votes: &mut [u32]) {
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
    }

    /// Fraction of trees voting for each class.
    pub fn vote_fractions(&self, row: &[f64], out: &mut [f64]) {
        let mut votes = vec![0u32; self.n_classes()];
        self.add_votes(row, &mut votes);
        let n = self.trees.len() as f64;
        for (o, v) in out.iter_mut().zip(votes) {
            *o = f64::from(v) / n;
        }
    }

    /// Majority vote; ties go to the earlier class.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0u32; self.n_classes()];
        self.add_votes(row, &mut votes);
        argmax_first(&votes) as usize
    }

    /// Checks that `ds` has the column layout this forest was trained on.
    pub fn check_compatible(&self, ds: &Dataset) -> Result<()> {
        if ds.n_features() != self.n_input_features {
            return Err(Error::ColumnMismatch(format!(
                "forest expects {} input columns, dataset has {}",
                self.n_input_features,
                ds.n_features()
            )));
        }
        for (&i, name) in self.trained_on.indices().iter().zip(&self.feature_names) {
            if &ds.feature(i).name != name {
                return Err(Error::ColumnMismatch(format!(
                    "column {i} is `{}`, forest expects `{name}`",
                    ds.feature(i).name
                )));
            }
        }
        Ok(())
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<usize>> {
        self.check_compatible(ds)?;
        Ok((0..ds.rows())
            .into_par_iter()
            .map_init(Vec::new, |buf, row| {
                ds.row_into(row, buf);
                self.predict_row(buf)
            })
            .collect())
    }

    /// Mean decrease in Gini impurity per feature of `trained_on`, normalized
    /// per tree, averaged over trees and renormalized to sum to one. A forest
    /// without any split gets uniform weights.
    pub fn gini_importance(&self) -> Vec<f64> {
        let k = self.trained_on.len();
        let position = |feature: usize| {
            self.trained_on
                .indices()
                .binary_search(&feature)
                .expect("split feature outside trained_on")
        };
        let mut total = vec![0.0; k];
        for tree in &self.trees {
            let mut per_tree = vec![0.0; k];
            for node in &tree.nodes {
                if let Node::Split { feature, gain, .. } = node {
                    per_tree[position(*feature)] += gain.max(0.0);
                }
            }
            let sum: f64 = per_tree.iter().sum();
            if sum > 0.0 {
                for (t, p) in total.iter_mut().zip(per_tree) {
                    *t += p / sum;
                }
            }
        }
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|t| *t /= sum);
        } else {
            total.iter_mut().for_each(|t| *t = 1.0 / k as f64);
        }
        total
    }
}

/// Fraction of rows of `test` whose top-1 prediction matches the label.
pub fn accuracy(forest: &Forest, test: &Dataset) -> Result<f64> {
    let predictions = forest.predict(test)?;
    let labels = test.labels(forest.target);
    // map test codes onto forest class positions by name
    let mapping: Vec<Option<usize>> = labels
        .classes()
        .iter()
        .map(|c| forest.class_labels.iter().position(|k| k == c))
        .collect();
    let correct = predictions
        .iter()
        .zip(labels.codes())
        .filter(|(&p, &code)| mapping[code as usize] == Some(p))
        .count();
    Ok(correct as f64 / test.rows() as f64)
}

/// Test accuracies of the task model and the adversary on one subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetEvaluation {
    pub subset: FeatureSubset,
    pub task_accuracy: f64,
    pub identifiability: f64,
}

/// Both forests trained for one subset, sharing one config.
#[derive(Clone, Debug)]
pub struct ForestPair {
    pub task: Forest,
    pub adversary: Forest,
}

pub fn train_pair(train_set: &Dataset, subset: &FeatureSubset, cfg: &ForestConfig) -> Result<ForestPair> {
    let pair_cfg = cfg.for_subset(subset);
    let (task, adversary) = rayon::join(
        || train(train_set, Target::Task, subset, &pair_cfg),
        || train(train_set, Target::User, subset, &pair_cfg),
    );
    Ok(ForestPair {
        task: task?,
        adversary: adversary?,
    })
}

/// Evaluates a subset on already-split data.
pub fn evaluate_on(parts: &Partitions, subset: &FeatureSubset, cfg: &ForestConfig) -> Result<SubsetEvaluation> {
    let pair = train_pair(&parts.train, subset, cfg)?;
    Ok(SubsetEvaluation {
        subset: subset.clone(),
        task_accuracy: accuracy(&pair.task, &parts.test)?,
        identifiability: accuracy(&pair.adversary, &parts.test)?,
    })
}

/// Splits `ds`, trains the task model and the adversary on the train
/// partition restricted to `subset`, and returns both test accuracies.
pub fn evaluate_pair(ds: &Dataset, subset: &FeatureSubset, split_spec: &SplitSpec, cfg: &ForestConfig) -> Result<SubsetEvaluation> {
    subset.validate(ds.n_features())?;
    let parts = split(ds, split_spec)?;
    evaluate_on(&parts, subset, cfg)
}

// ---------------------------------------------------------------------------
// JSON document

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NodeDoc {
    Leaf {
        counts: Vec<u32>,
    },
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
}

#[derive(Serialize, Deserialize)]
struct ForestDoc {
    version: u32,
    target: Target,
    class_labels: Vec<String>,
    trained_on: FeatureSubset,
    feature_names: Vec<String>,
    n_input_features: usize,
    config: ForestConfig,
    trees: Vec<NodeDoc>,
}

fn to_doc(tree: &Tree, i: usize) -> NodeDoc {
    match &tree.nodes[i] {
        Node::Leaf { counts, .. } => NodeDoc::Leaf {
            counts: counts.clone(),
        },
        Node::Split {
            feature,
            threshold,
            gain,
            left,
            right,
        } => NodeDoc::Split {
            feature: *feature,
            threshold: *threshold,
            gain: *gain,
            left: Box::new(to_doc(tree, *left as usize)),
            right: Box::new(to_doc(tree, *right as usize)),
        },
    }
}

fn from_doc(doc: NodeDoc, nodes: &mut Vec<Node>, n_classes: usize, allowed: &FeatureSubset) -> Result<u32> {
    let id = nodes.len();
    match doc {
        NodeDoc::Leaf { counts } => {
            if counts.len() != n_classes || counts.iter().all(|&c| c == 0) {
                return Err(Error::InvalidParameter("malformed leaf in forest document".into()));
            }
            let class = argmax_first(&counts);
            nodes.push(Node::Leaf { counts, class });
        }
        NodeDoc::Split {
            feature,
            threshold,
            gain,
            left,
            right,
        } => {
            if !allowed.contains(feature) {
                return Err(Error::InvalidParameter(format!(
                    "split feature {feature} not in trained_on"
                )));
            }
            nodes.push(Node::Leaf {
                counts: Vec::new(),
                class: 0,
            });
            let left = from_doc(*left, nodes, n_classes, allowed)?;
            let right = from_doc(*right, nodes, n_classes, allowed)?;
            nodes[id] = Node::Split {
                feature,
                threshold,
                gain,
                left,
                right,
            };
        }
    }
    Ok(id as u32)
}

impl Forest {
    pub fn to_json(&self) -> Result<String> {
        let doc = ForestDoc {
            version: FOREST_FORMAT_VERSION,
            target: self.target,
            class_labels: self.class_labels.clone(),
            trained_on: self.trained_on.clone(),
            feature_names: self.feature_names.clone(),
            n_input_features: self.n_input_features,
            config: self.config,
            trees: self.trees.iter().map(|t| to_doc(t, 0)).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ForestDoc = serde_json::from_str(s)?;
        if doc.version != FOREST_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported forest document version {}",
                doc.version
            )));
        }
        let n_classes = doc.class_labels.len();
        let trees = doc
            .trees
            .into_iter()
            .map(|root| {
                let mut nodes = Vec::new();
                from_doc(root, &mut nodes, n_classes, &doc.trained_on)?;
                Ok(Tree { nodes })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            target: doc.target,
            class_labels: doc.class_labels,
            trained_on: doc.trained_on,
            feature_names: doc.feature_names,
            n_input_features: doc.n_input_features,
            config: doc.config,
            trees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{FeatureColumn, Labeling};

    fn separable(n: usize) -> Dataset {
        let f0: Vec<f64> = (0..n).map(|i| i as f64 - (n / 2) as f64 + 0.5).collect();
        let f1: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64).collect();
        let task: Vec<u32> = f0.iter().map(|&v| u32::from(v >= 0.0)).collect();
        let user: Vec<u32> = (0..n).map(|i| (i % 3) as u32).collect();
        Dataset::new(
            vec![FeatureColumn::new("f0", f0), FeatureColumn::new("f1", f1)],
            Labeling::from_codes(task, 2).unwrap(),
            Labeling::from_codes(user, 3).unwrap(),
        )
        .unwrap()
    }

    fn small_cfg() -> ForestConfig {
        ForestConfig {
            n_trees: 15,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn separable_training_accuracy_is_one() {
        let ds = separable(60);
        let f = train(&ds, Target::Task, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        assert_eq!(accuracy(&f, &ds).unwrap(), 1.0);
    }

    #[test]
    fn constant_target_predicts_constant() {
        let ds = separable(30);
        let constant = Dataset::new(
            ds.features().to_vec(),
            Labeling::from_codes(vec![1; 30], 2).unwrap(),
            ds.user_labels().clone(),
        )
        .unwrap();
        let f = train(&constant, Target::Task, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        assert!(f.predict(&constant).unwrap().iter().all(|&p| p == 1));
        assert!(f.trees().iter().all(|t| t.n_nodes() == 1));
        let imp = f.gini_importance();
        assert_eq!(imp, vec![0.5, 0.5]);
    }

    #[test]
    fn constant_predictor_gets_majority_frequency() {
        let ds = separable(30);
        let constant = Dataset::new(
            ds.features().to_vec(),
            Labeling::from_codes(vec![0; 30], 2).unwrap(),
            ds.user_labels().clone(),
        )
        .unwrap();
        let f = train(&constant, Target::User, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        // user labels are 0,1,2 balanced: any constant prediction scores 1/3
        let single = Dataset::new(
            vec![FeatureColumn::new("f0", vec![0.0; 30]), FeatureColumn::new("f1", vec![0.0; 30])],
            constant.task_labels().clone(),
            constant.user_labels().clone(),
        )
        .unwrap();
        let g = train(&single, Target::User, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        assert!((accuracy(&g, &single).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(accuracy(&f, &constant).unwrap() <= 1.0);
    }

    #[test]
    fn perfect_predictions_score_one() {
        let ds = separable(40);
        let f = train(&ds, Target::Task, &FeatureSubset::new(vec![0]).unwrap(), &small_cfg()).unwrap();
        assert_eq!(accuracy(&f, &ds).unwrap(), 1.0);
    }

    #[test]
    fn empty_subset_is_rejected() {
        assert!(FeatureSubset::new(vec![]).is_err());
        let ds = separable(10);
        let err = train(&ds, Target::Task, &FeatureSubset::new(vec![5]).unwrap(), &small_cfg()).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { .. }));
    }

    #[test]
    fn importance_single_used_feature() {
        let ds = separable(50);
        let cfg = ForestConfig {
            features_per_split: FeaturesPerSplit::All,
            ..small_cfg()
        };
        // f0 alone separates the classes perfectly so every split uses it
        let f = train(&ds, Target::Task, &FeatureSubset::full(2).unwrap(), &cfg).unwrap();
        assert!(f.trees().iter().all(|t| t.split_features().all(|s| s == 0)));
        assert_eq!(f.gini_importance(), vec![1.0, 0.0]);
    }

    #[test]
    fn constant_feature_has_zero_importance() {
        let ds = separable(50);
        let cols = vec![ds.feature(0).clone(), FeatureColumn::new("c", vec![2.5; 50]), ds.feature(1).clone()];
        let ds = ds.with_features(cols).unwrap();
        let f = train(&ds, Target::User, &FeatureSubset::full(3).unwrap(), &small_cfg()).unwrap();
        let imp = f.gini_importance();
        assert_eq!(imp[1], 0.0);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let ds = separable(40);
        let f = train(&ds, Target::User, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        let back = Forest::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(f, back);
        assert!(Forest::from_json(&f.to_json().unwrap().replace("\"version\":1", "\"version\":9")).is_err());
    }

    #[test]
    fn column_mismatch_is_reported() {
        let ds = separable(20);
        let f = train(&ds, Target::Task, &FeatureSubset::full(2).unwrap(), &small_cfg()).unwrap();
        let other = project_first(&ds);
        assert!(matches!(accuracy(&f, &other), Err(Error::ColumnMismatch(_))));
    }

    fn project_first(ds: &Dataset) -> Dataset {
        crate::tabular::project(ds, &FeatureSubset::new(vec![0]).unwrap()).unwrap()
    }

    #[test]
    fn label_leakage_gives_full_identifiability() {
        let n = 90;
        let user: Vec<u32> = (0..n).map(|i| (i % 9) as u32).collect();
        let ds = Dataset::new(
            vec![FeatureColumn::new("uid", user.iter().map(|&u| f64::from(u)).collect())],
            Labeling::from_codes((0..n).map(|i| (i % 2) as u32).collect(), 2).unwrap(),
            Labeling::from_codes(user, 9).unwrap(),
        )
        .unwrap();
        let eval = evaluate_pair(&ds, &FeatureSubset::full(1).unwrap(), &SplitSpec::default(), &small_cfg()).unwrap();
        assert_eq!(eval.identifiability, 1.0);
    }
}
