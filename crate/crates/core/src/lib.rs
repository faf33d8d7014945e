//! Feature-level data minimization for tabular classification.
//!
//! Given a dataset with a task labeling and a user labeling, find the feature
//! subset that makes users hardest to re-identify while keeping task accuracy
//! within a tolerance of the best achievable. Identifiability is the accuracy
//! of an adversary forest trained to predict the user from the same features.
//!
//! ```no_run
//! use datamin_core::*;
//!
//! let ds = generate(&SynthSpec::dense(7)).unwrap();
//! let all = FeatureSubset::full(ds.n_features()).unwrap();
//! let policy = ThresholdPolicy::new(0.01, BaseAccuracy::MaxOverSubsets).unwrap();
//! let res = exhaustive_search(&ds, &all, &policy, &SplitSpec::default(), &ForestConfig::default()).unwrap();
//! println!("{} -> {:.3}", res.chosen, res.evaluation.identifiability);
//! ```

pub mod attribution;
pub mod baselines;
pub mod error;
pub mod model;
pub mod report;
pub mod seed;
pub mod solvers;
pub mod synth;
pub mod tabular;

pub use attribution::{
    marginal_entropy, mutual_information, quantile_bins, score_features, shapley, tradeoff_score, BinningSpec,
    ScoreMethod, ScoreTable, ScoringContext, ShapAttribution, ShapConfig,
};
pub use baselines::{dp_noise, hash_features, pca_transform, DpSpec, HashSpec, PcaModel, PcaSpec};
pub use error::{Error, Result};
pub use model::{
    accuracy, evaluate_on, evaluate_pair, train, train_pair, FeaturesPerSplit, Forest, ForestConfig, ForestPair,
    SubsetEvaluation,
};
pub use report::{
    curve_export, greedy_curve, relative_effectiveness, threshold_sweep, CurvePoint, ParameterReport, ReportMeta,
    SweepSolver, TradeoffReport, TradeoffRow, DEFAULT_THRESHOLDS,
};
pub use solvers::{
    exhaustive_search, feature_minimize, feature_minimize_with, greedy_minimize, greedy_select, hybrid_minimize,
    knapsack_oracle, BaseAccuracy, GreedyOrder, GreedyStrategy, HybridSpec, MethodRecord, MinimizationResult,
    MinimizeOptions, StopRule, ThresholdPolicy,
};
pub use synth::{generate, oracle_enumerate, OracleTable, SynthSpec};
pub use tabular::{
    load_csv, project, split, Dataset, FeatureColumn, FeatureSubset, Labeling, NaPolicy, SplitSpec, Stratify, Target,
};
