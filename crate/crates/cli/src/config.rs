use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use datamin_core::{
    BaseAccuracy, BinningSpec, ForestConfig, GreedyOrder, NaPolicy, ScoreMethod, ShapConfig, SplitSpec, StopRule, Stratify,
    DEFAULT_THRESHOLDS,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Greedy,
    Hybrid,
    Hash,
    Pca,
    Dp,
}

impl Method {
    pub fn is_transform(self) -> bool {
        matches!(self, Method::Hash | Method::Pca | Method::Dp)
    }
}

/// Everything a run needs. Loaded from `--config`, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub task_column: String,
    pub user_column: String,
    pub na_policy: NaPolicy,
    pub method: Method,
    pub scoring: ScoreMethod,
    pub keep: usize,
    /// Greedy order; defaults per scoring method.
    pub order: Option<GreedyOrder>,
    pub top_k: Option<usize>,
    pub utility_sum: Option<f64>,
    pub threshold: f64,
    pub thresholds: Vec<f64>,
    pub base: BaseAccuracy,
    pub buckets: Vec<usize>,
    pub components: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub split: SplitSpec,
    pub forest: ForestConfig,
    pub shap: ShapConfig,
    pub bins: BinningSpec,
    /// Output directory; not part of the recorded config.
    #[serde(skip_serializing)]
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            task_column: "task".into(),
            user_column: "user".into(),
            na_policy: NaPolicy::DropRows,
            method: Method::Exhaustive,
            scoring: ScoreMethod::Shap,
            keep: 12,
            order: None,
            top_k: None,
            utility_sum: None,
            threshold: 0.01,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            base: BaseAccuracy::MaxOverSubsets,
            buckets: vec![4, 8, 16],
            components: vec![2, 4, 8],
            epsilon: vec![0.1, 1.0, 10.0],
            split: SplitSpec::default(),
            forest: ForestConfig::default(),
            shap: ShapConfig::default(),
            bins: BinningSpec::default(),
            output: PathBuf::from("datamin-out"),
        }
    }
}

/// Parses a value by its serde name, so flags accept the same spellings as
/// the config file.
fn by_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

// Aliases keep clap from treating these as multi-occurrence arguments.
type Floats = Vec<f64>;
type Counts = Vec<usize>;

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

/// Flags shared by the data-driven subcommands. Each one overrides the
/// config field of the same name.
#[derive(Args, Clone, Debug, Default)]
pub struct RunFlags {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub task_column: Option<String>,
    #[arg(long)]
    pub user_column: Option<String>,
    /// drop_rows | error
    #[arg(long, value_parser = by_name::<NaPolicy>)]
    pub na_policy: Option<NaPolicy>,
    /// exhaustive | greedy | hybrid | hash | pca | dp
    #[arg(long, value_parser = by_name::<Method>)]
    pub method: Option<Method>,
    /// entropy_privacy | mi_utility | tradeoff | shap | gini
    #[arg(long, value_parser = by_name::<ScoreMethod>)]
    pub scoring: Option<ScoreMethod>,
    #[arg(long)]
    pub keep: Option<usize>,
    /// utility_desc | identifiability_asc | ctv_asc
    #[arg(long, value_parser = by_name::<GreedyOrder>)]
    pub order: Option<GreedyOrder>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub utility_sum: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated list
    #[arg(long, value_parser = list::<f64>)]
    pub thresholds: Option<Floats>,
    /// max_over_subsets | full_feature_set
    #[arg(long, value_parser = by_name::<BaseAccuracy>)]
    pub base: Option<BaseAccuracy>,
    #[arg(long, value_parser = list::<usize>)]
    pub buckets: Option<Counts>,
    #[arg(long, value_parser = list::<usize>)]
    pub components: Option<Counts>,
    #[arg(long, value_parser = list::<f64>)]
    pub epsilon: Option<Floats>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// task | user | joint
    #[arg(long, value_parser = by_name::<Stratify>)]
    pub stratify: Option<Stratify>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub forest_seed: Option<u64>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub shap_seed: Option<u64>,
    #[arg(long)]
    pub shap_rows: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Output directory
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Record the wall-clock time in report metadata
    #[arg(long)]
    pub timestamp: bool,
}

macro_rules! set {
    ($target:expr, $flag:expr) => {
        if let Some(v) = $flag.clone() {
            $target = v;
        }
    };
}

impl RunFlags {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if self.data.is_some() {
            cfg.dataset = self.data.clone();
        }
        set!(cfg.task_column, self.task_column);
        set!(cfg.user_column, self.user_column);
        set!(cfg.na_policy, self.na_policy);
        set!(cfg.method, self.method);
        set!(cfg.scoring, self.scoring);
        set!(cfg.keep, self.keep);
        if self.order.is_some() {
            cfg.order = self.order;
        }
        if self.top_k.is_some() {
            cfg.top_k = self.top_k;
            cfg.utility_sum = None;
        }
        if self.utility_sum.is_some() {
            cfg.utility_sum = self.utility_sum;
            cfg.top_k = None;
        }
        set!(cfg.threshold, self.threshold);
        set!(cfg.thresholds, self.thresholds);
        set!(cfg.base, self.base);
        set!(cfg.buckets, self.buckets);
        set!(cfg.components, self.components);
        set!(cfg.epsilon, self.epsilon);
        set!(cfg.split.test_fraction, self.test_fraction);
        set!(cfg.split.seed, self.split_seed);
        set!(cfg.split.stratify_on, self.stratify);
        set!(cfg.forest.n_trees, self.trees);
        if self.max_depth.is_some() {
            cfg.forest.max_depth = self.max_depth;
        }
        set!(cfg.forest.seed, self.forest_seed);
        set!(cfg.shap.permutations, self.permutations);
        set!(cfg.shap.seed, self.shap_seed);
        set!(cfg.shap.max_rows, self.shap_rows);
        set!(cfg.bins.bins, self.bins);
        set!(cfg.output, self.out);
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_none() {
            bail!("no dataset given (use --data or the `dataset` config field)");
        }
        if self.task_column == self.user_column {
            bail!("task and user columns must differ");
        }
        if self.top_k.is_some() && self.utility_sum.is_some() {
            bail!("set at most one of top_k and utility_sum");
        }
        self.forest.validate()?;
        Ok(())
    }

    pub fn greedy_order(&self) -> GreedyOrder {
        self.order.unwrap_or(GreedyOrder::default_for(self.scoring))
    }

    pub fn stop_rule(&self) -> Option<StopRule> {
        match (self.top_k, self.utility_sum) {
            (Some(k), _) => Some(StopRule::TopK(k)),
            (_, Some(v)) => Some(StopRule::UtilitySum(v)),
            _ => None,
        }
    }
}
