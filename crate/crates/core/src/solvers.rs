//! Provider strategies: exhaustive subset search under an accuracy threshold,
//! greedy knapsack heuristics over per-feature scores, the two-stage hybrid,
//! and the `feature_minimize` entry point.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{score_features, BinningSpec, ScoreMethod, ScoreTable, ScoringContext, ShapConfig};
use crate::error::{Error, Result};
use crate::model::{evaluate_on, ForestConfig, SubsetEvaluation};
use crate::tabular::{split, Dataset, FeatureColumn, FeatureSubset, Labeling, SplitSpec};

/// Hard limit on the number of candidates for exhaustive enumeration.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;
/// Above this many candidates enumeration is slow enough to warn about.
pub const EXHAUSTIVE_WARN_ABOVE: usize = 15;

/// Which accuracy the threshold relaxes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseAccuracy {
    /// Highest task accuracy over all evaluated subsets.
    #[default]
    MaxOverSubsets,
    /// Task accuracy of the full candidate set.
    FullFeatureSet,
}

impl FromStr for BaseAccuracy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_over_subsets" => Ok(Self::MaxOverSubsets),
            "full_feature_set" => Ok(Self::FullFeatureSet),
            _ => Err(Error::InvalidParameter(format!("unknown base `{s}`"))),
        }
    }
}

/// Tolerated fractional accuracy loss `threshold` against a base accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub threshold: f64,
    pub base: BaseAccuracy,
}

impl ThresholdPolicy {
    pub fn new(threshold: f64, base: BaseAccuracy) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in [0,1], got {threshold}"
            )));
        }
        Ok(Self { threshold, base })
    }

    /// Minimum task accuracy a subset must reach.
    pub fn bound(&self, base_accuracy: f64) -> f64 {
        (1.0 - self.threshold) * base_accuracy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyOrder {
    UtilityDesc,
    IdentifiabilityAsc,
    CtvAsc,
}

impl GreedyOrder {
    /// Natural preselection order for a scoring method.
    pub fn default_for(method: ScoreMethod) -> Self {
        match method {
            ScoreMethod::EntropyPrivacy => GreedyOrder::IdentifiabilityAsc,
            _ => GreedyOrder::UtilityDesc,
        }
    }
}

impl fmt::Display for GreedyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreedyOrder::UtilityDesc => "utility_desc",
            GreedyOrder::IdentifiabilityAsc => "identifiability_asc",
            GreedyOrder::CtvAsc => "ctv_asc",
        })
    }
}

impl FromStr for GreedyOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "utility_desc" => Ok(Self::UtilityDesc),
            "identifiability_asc" => Ok(Self::IdentifiabilityAsc),
            "ctv_asc" => Ok(Self::CtvAsc),
            _ => Err(Error::InvalidParameter(format!("unknown greedy order `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once the selected utility reaches the total `V`.
    UtilitySum(f64),
    TopK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyStrategy {
    pub order: GreedyOrder,
    pub stop: StopRule,
}

fn require<'a>(v: &'a Option<Vec<f64>>, what: &str, method: ScoreMethod) -> Result<&'a [f64]> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidParameter(format!("{method} scores carry no {what} vector")))
}

/// Positions of `scores` in greedy order; ties go to the lower feature index.
pub fn greedy_order(scores: &ScoreTable, order: GreedyOrder) -> Result<Vec<usize>> {
    let keys: Vec<f64> = match order {
        GreedyOrder::UtilityDesc => require(&scores.utility, "utility", scores.method)?
            .iter()
            .map(|v| -v)
            .collect(),
        GreedyOrder::IdentifiabilityAsc => require(&scores.identifiability, "identifiability", scores.method)?.to_vec(),
        GreedyOrder::CtvAsc => {
            let v = require(&scores.utility, "utility", scores.method)?;
            let c = require(&scores.identifiability, "identifiability", scores.method)?;
            v.iter()
                .zip(c)
                .map(|(&v, &c)| if v > 0.0 { c / v } else { f64::INFINITY })
                .collect()
        }
    };
    let mut positions: Vec<usize> = (0..scores.len()).collect();
    positions.sort_by(|&a, &b| {
        keys[a]
            .total_cmp(&keys[b])
            .then(scores.features[a].cmp(&scores.features[b]))
    });
    Ok(positions)
}

/// Takes features in strategy order until the stop rule is met.
pub fn greedy_select(scores: &ScoreTable, strategy: &GreedyStrategy) -> Result<FeatureSubset> {
    let d = scores.len();
    let order = greedy_order(scores, strategy.order)?;
    let taken: Vec<usize> = match strategy.stop {
        StopRule::TopK(k) => {
            if k == 0 || k > d {
                return Err(Error::InvalidParameter(format!("top_k must lie in [1,{d}], got {k}")));
            }
            order[..k].to_vec()
        }
        StopRule::UtilitySum(target) => {
            if target.is_nan() || target <= 0.0 {
                return Err(Error::InvalidParameter(format!("utility target must be positive, got {target}")));
            }
            let v = require(&scores.utility, "utility", scores.method)?;
            let mut sum = 0.0;
            let mut taken = Vec::new();
            for pos in order {
                taken.push(pos);
                sum += v[pos];
                if sum >= target {
                    break;
                }
            }
            if sum < target {
                return Err(Error::Infeasible(format!(
                    "total utility {sum} cannot reach {target}"
                )));
            }
            taken
        }
    };
    FeatureSubset::from_unsorted(taken.into_iter().map(|p| scores.features[p]).collect())
}

/// Exact minimum-cost subset with utility at least `target`, by enumeration.
/// Ties go to fewer features, then the lexicographically smaller subset.
pub fn knapsack_oracle(scores: &ScoreTable, target: f64) -> Result<FeatureSubset> {
    let d = scores.len();
    if d > 20 {
        return Err(Error::CapExceeded { requested: d, cap: 20 });
    }
    let v = require(&scores.utility, "utility", scores.method)?;
    let c = require(&scores.identifiability, "identifiability", scores.method)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u32..(1 << d) {
        let members: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let value: f64 = members.iter().map(|&i| v[i]).sum();
        if value < target {
            continue;
        }
        let cost: f64 = members.iter().map(|&i| c[i]).sum();
        let better = match &best {
            None => true,
            Some((bc, bm)) => cost
                .total_cmp(bc)
                .then(members.len().cmp(&bm.len()))
                .then_with(|| members.cmp(bm))
                == Ordering::Less,
        };
        if better {
            best = Some((cost, members));
        }
    }
    let (_, members) = best.ok_or_else(|| Error::Infeasible(format!("no subset reaches utility {target}")))?;
    FeatureSubset::from_unsorted(members.into_iter().map(|p| scores.features[p]).collect())
}

/// Sum of identifiability scores over a subset of `scores.features`.
pub fn knapsack_cost(scores: &ScoreTable, subset: &FeatureSubset) -> Result<f64> {
    let c = require(&scores.identifiability, "identifiability", scores.method)?;
    Ok(scores
        .features
        .iter()
        .zip(c)
        .filter(|(f, _)| subset.contains(**f))
        .map(|(_, c)| c)
        .sum())
}

pub type ProgressFn = dyn Fn(usize, usize) + Send + Sync;

#[derive(Clone)]
pub struct SearchOptions {
    pub cap: usize,
    /// Called with (evaluated, total) after each subset evaluation.
    pub progress: Option<Arc<ProgressFn>>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_EXHAUSTIVE_CAP,
            progress: None,
        }
    }
}

impl fmt::Debug for SearchOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchOptions")
            .field("cap", &self.cap)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

/// Every non-empty subset of `candidates` with its two accuracies, ordered by
/// bitmask over the candidate list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationLog {
    pub candidates: FeatureSubset,
    pub evaluations: Vec<SubsetEvaluation>,
}

impl EvaluationLog {
    pub fn full_set(&self) -> &SubsetEvaluation {
        self.evaluations.last().expect("log is never empty")
    }

    pub fn write_csv<W: Write>(&self, writer: W, ds: &Dataset) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["subset", "features", "n_features", "task_accuracy", "identifiability"])?;
        for e in &self.evaluations {
            let idx: Vec<String> = e.subset.indices().iter().map(usize::to_string).collect();
            wtr.write_record([
                idx.join(";"),
                e.subset.names(ds).join(";"),
                e.subset.len().to_string(),
                e.task_accuracy.to_string(),
                e.identifiability.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Trains both models on every non-empty subset of `candidates`.
///
/// Subsets are evaluated in parallel. Each subset's forests are seeded from
/// the master seed and the subset itself, so the log is independent of
/// scheduling.
pub fn evaluate_all(ds: &Dataset, candidates: &FeatureSubset, split_spec: &SplitSpec, cfg: &ForestConfig, opts: &SearchOptions) -> Result<EvaluationLog> {
    candidates.validate(ds.n_features())?;
    let k = candidates.len();
    if k > opts.cap || k > 63 {
        return Err(Error::CapExceeded {
            requested: k,
            cap: opts.cap.min(63),
        });
    }
    if k > EXHAUSTIVE_WARN_ABOVE {
        log::warn!("exhaustive search over {k} features ({} subsets) may take hours", (1u64 << k) - 1);
    }
    cfg.validate()?;
    let parts = split(ds, split_spec)?;
    let total = (1usize << k) - 1;
    let done = AtomicUsize::new(0);
    let evaluations = (1u64..=total as u64)
        .into_par_iter()
        .map(|mask| {
            let subset = FeatureSubset::from_mask(candidates, mask)?;
            let eval = evaluate_on(&parts, &subset, cfg)?;
            if let Some(progress) = &opts.progress {
                progress(done.fetch_add(1, AtomicOrdering::Relaxed) + 1, total);
            }
            Ok(eval)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationLog {
        candidates: candidates.clone(),
        evaluations,
    })
}

/// Base evaluation: highest accuracy; ties to lower identifiability, fewer
/// features, then lexicographic order.
fn max_accuracy(evals: &[SubsetEvaluation]) -> &SubsetEvaluation {
    evals
        .iter()
        .min_by(|a, b| {
            b.task_accuracy
                .total_cmp(&a.task_accuracy)
                .then(a.identifiability.total_cmp(&b.identifiability))
                .then(a.subset.len().cmp(&b.subset.len()))
                .then_with(|| a.subset.cmp(&b.subset))
        })
        .expect("non-empty evaluations")
}

/// Ranking of feasible subsets: identifiability ascending, then fewer
/// features, higher accuracy, lexicographic indices.
fn rank(a: &SubsetEvaluation, b: &SubsetEvaluation) -> Ordering {
    a.identifiability
        .total_cmp(&b.identifiability)
        .then(a.subset.len().cmp(&b.subset.len()))
        .then(b.task_accuracy.total_cmp(&a.task_accuracy))
        .then_with(|| a.subset.cmp(&b.subset))
}

/// Applies a threshold policy to a log, returning (chosen, base).
pub fn select(log: &EvaluationLog, policy: &ThresholdPolicy) -> Result<(SubsetEvaluation, SubsetEvaluation)> {
    if log.evaluations.is_empty() {
        return Err(Error::EmptySubset);
    }
    let base = match policy.base {
        BaseAccuracy::MaxOverSubsets => max_accuracy(&log.evaluations),
        BaseAccuracy::FullFeatureSet => log.full_set(),
    };
    let bound = policy.bound(base.task_accuracy);
    let chosen = log
        .evaluations
        .iter()
        .filter(|e| e.task_accuracy >= bound)
        .min_by(|a, b| rank(a, b))
        .expect("the base subset is always feasible");
    Ok((chosen.clone(), base.clone()))
}

/// How a result was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodRecord {
    Exhaustive,
    Greedy {
        scoring: ScoreMethod,
        strategy: GreedyStrategy,
    },
    Hybrid {
        scoring: ScoreMethod,
        order: GreedyOrder,
        keep: usize,
        preselected: FeatureSubset,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub chosen: FeatureSubset,
    pub evaluation: SubsetEvaluation,
    /// Evaluation whose accuracy the threshold was applied to.
    pub baseline: SubsetEvaluation,
    pub policy: ThresholdPolicy,
    pub candidates_evaluated: usize,
    pub feasible: bool,
    pub method: MethodRecord,
}

pub(crate) fn result_from_log(log: &EvaluationLog, policy: &ThresholdPolicy, method: MethodRecord) -> Result<MinimizationResult> {
    let (chosen, base) = select(log, policy)?;
    Ok(MinimizationResult {
        chosen: chosen.subset.clone(),
        feasible: chosen.task_accuracy >= policy.bound(base.task_accuracy),
        evaluation: chosen,
        baseline: base,
        policy: *policy,
        candidates_evaluated: log.evaluations.len(),
        method,
    })
}

pub fn exhaustive_search(ds: &Dataset, candidates: &FeatureSubset, policy: &ThresholdPolicy, split_spec: &SplitSpec, cfg: &ForestConfig) -> Result<MinimizationResult> {
    exhaustive_search_with(ds, candidates, policy, split_spec, cfg, &SearchOptions::default())
}

pub fn exhaustive_search_with(
    ds: &Dataset,
    candidates: &FeatureSubset,
    policy: &ThresholdPolicy,
    split_spec: &SplitSpec,
    cfg: &ForestConfig,
    opts: &SearchOptions,
) -> Result<MinimizationResult> {
    ThresholdPolicy::new(policy.threshold, policy.base)?;
    let log = evaluate_all(ds, candidates, split_spec, cfg, opts)?;
    result_from_log(&log, policy, MethodRecord::Exhaustive)
}

/// Scoring method and greedy order for the preselection stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridSpec {
    pub scoring: ScoreMethod,
    pub order: GreedyOrder,
    pub keep: usize,
    pub shap: ShapConfig,
    pub bins: BinningSpec,
}

impl HybridSpec {
    pub fn new(scoring: ScoreMethod, keep: usize) -> Self {
        Self {
            scoring,
            order: GreedyOrder::default_for(scoring),
            keep,
            shap: ShapConfig::default(),
            bins: BinningSpec::default(),
        }
    }
}

/// Stage one of the hybrid: score every feature and keep the top `keep`.
pub fn preselect(ds: &Dataset, split_spec: &SplitSpec, cfg: &ForestConfig, spec: &HybridSpec, cap: usize) -> Result<(ScoreTable, FeatureSubset)> {
    let d = ds.n_features();
    if spec.keep == 0 || spec.keep > d.min(cap) {
        return Err(Error::InvalidParameter(format!(
            "keep must lie in [1,{}], got {}",
            d.min(cap),
            spec.keep
        )));
    }
    let ctx = ScoringContext {
        split: *split_spec,
        forest: *cfg,
        shap: spec.shap,
        bins: spec.bins,
    };
    let scores = score_features(ds, &FeatureSubset::full(d)?, spec.scoring, &ctx)?;
    let kept = greedy_select(
        &scores,
        &GreedyStrategy {
            order: spec.order,
            stop: StopRule::TopK(spec.keep),
        },
    )?;
    Ok((scores, kept))
}

/// Greedy preselection to `keep` features followed by exhaustive search
/// within them.
pub fn hybrid_minimize(ds: &Dataset, policy: &ThresholdPolicy, split_spec: &SplitSpec, cfg: &ForestConfig, spec: &HybridSpec) -> Result<MinimizationResult> {
    hybrid_minimize_with(ds, policy, split_spec, cfg, spec, &SearchOptions::default())
}

pub fn hybrid_minimize_with(
    ds: &Dataset,
    policy: &ThresholdPolicy,
    split_spec: &SplitSpec,
    cfg: &ForestConfig,
    spec: &HybridSpec,
    opts: &SearchOptions,
) -> Result<MinimizationResult> {
    ThresholdPolicy::new(policy.threshold, policy.base)?;
    let (_, kept) = preselect(ds, split_spec, cfg, spec, opts.cap)?;
    let log = evaluate_all(ds, &kept, split_spec, cfg, opts)?;
    result_from_log(
        &log,
        policy,
        MethodRecord::Hybrid {
            scoring: spec.scoring,
            order: spec.order,
            keep: spec.keep,
            preselected: kept,
        },
    )
}

/// Scores features, selects greedily and evaluates the selection.
pub fn greedy_minimize(
    ds: &Dataset,
    split_spec: &SplitSpec,
    ctx: &ScoringContext,
    scoring: ScoreMethod,
    strategy: &GreedyStrategy,
) -> Result<(ScoreTable, SubsetEvaluation)> {
    let scores = score_features(ds, &FeatureSubset::full(ds.n_features())?, scoring, ctx)?;
    let chosen = greedy_select(&scores, strategy)?;
    let parts = split(ds, split_spec)?;
    let eval = evaluate_on(&parts, &chosen, &ctx.forest)?;
    Ok((scores, eval))
}

/// Settings behind [`feature_minimize`].
#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub split: SplitSpec,
    pub forest: ForestConfig,
    pub base: BaseAccuracy,
    pub hybrid: HybridSpec,
    pub search: SearchOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            forest: ForestConfig::default(),
            base: BaseAccuracy::default(),
            hybrid: HybridSpec::new(ScoreMethod::Shap, 12),
            search: SearchOptions::default(),
        }
    }
}

/// Exhaustive search when the feature count is within the cap, otherwise
/// the hybrid with the configured preselection.
pub fn feature_minimize_with(ds: &Dataset, threshold: f64, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    let policy = ThresholdPolicy::new(threshold, opts.base)?;
    let d = ds.n_features();
    if d <= opts.search.cap {
        exhaustive_search_with(ds, &FeatureSubset::full(d)?, &policy, &opts.split, &opts.forest, &opts.search)
    } else {
        let mut hybrid = opts.hybrid.clone();
        hybrid.keep = hybrid.keep.min(d);
        hybrid_minimize_with(ds, &policy, &opts.split, &opts.forest, &hybrid, &opts.search)
    }
}

/// Returns the feature subset to keep given the task labels, the user
/// labels and the tolerated fractional accuracy loss.
pub fn feature_minimize(features: Vec<FeatureColumn>, utility_labels: Labeling, user_labels: Labeling, threshold: f64) -> Result<FeatureSubset> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in [0,1], got {threshold}"
        )));
    }
    let ds = Dataset::new(features, utility_labels, user_labels)?;
    Ok(feature_minimize_with(&ds, threshold, &MinimizeOptions::default())?.chosen)
}
