//! Per-feature utility (value) and identifiability (cost) scores.

mod info;
mod shapley;

pub use info::{marginal_entropy, mutual_information, quantile_bins, tradeoff_score, BinningSpec};
pub use shapley::{shapley, ShapAttribution, ShapConfig};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{train_pair, ForestConfig};
use crate::tabular::{split, Dataset, FeatureSubset, SplitSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    EntropyPrivacy,
    MiUtility,
    Tradeoff,
    Shap,
    Gini,
}

impl ScoreMethod {
    pub const ALL: [ScoreMethod; 5] = [
        ScoreMethod::EntropyPrivacy,
        ScoreMethod::MiUtility,
        ScoreMethod::Tradeoff,
        ScoreMethod::Shap,
        ScoreMethod::Gini,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMethod::EntropyPrivacy => "entropy_privacy",
            ScoreMethod::MiUtility => "mi_utility",
            ScoreMethod::Tradeoff => "tradeoff",
            ScoreMethod::Shap => "shap",
            ScoreMethod::Gini => "gini",
        }
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scoring method `{s}`")))
    }
}

/// Per-feature scores. `utility` holds v_f, `identifiability` holds c_f;
/// either may be absent depending on the method. For the tradeoff method
/// `utility` holds the combined score (higher is better).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub method: ScoreMethod,
    /// Dataset feature index of each scored entry.
    pub features: Vec<usize>,
    pub names: Vec<String>,
    pub utility: Option<Vec<f64>>,
    pub identifiability: Option<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(
        method: ScoreMethod,
        features: Vec<usize>,
        names: Vec<String>,
        utility: Option<Vec<f64>>,
        identifiability: Option<Vec<f64>>,
    ) -> Result<Self> {
        let d = features.len();
        if names.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: names.len(),
            });
        }
        for v in [&utility, &identifiability].into_iter().flatten() {
            if v.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("scores must be finite".into()));
            }
        }
        if utility.is_none() && identifiability.is_none() {
            return Err(Error::InvalidParameter("score table has no score vector".into()));
        }
        Ok(Self {
            method,
            features,
            names,
            utility,
            identifiability,
        })
    }

    /// Table over features `0..d` named `f0..`, for tests and raw knapsack use.
    pub fn from_vectors(method: ScoreMethod, utility: Option<Vec<f64>>, identifiability: Option<Vec<f64>>) -> Result<Self> {
        let d = utility
            .as_ref()
            .or(identifiability.as_ref())
            .map_or(0, Vec::len);
        Self::new(
            method,
            (0..d).collect(),
            (0..d).map(|i| format!("f{i}")).collect(),
            utility,
            identifiability,
        )
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["feature", "name", "v", "c"])?;
        let cell = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(String::new(), |v| v[i].to_string());
        for i in 0..self.len() {
            wtr.write_record([
                self.features[i].to_string(),
                self.names[i].clone(),
                cell(&self.utility, i),
                cell(&self.identifiability, i),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Everything a scoring method may need besides the data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringContext {
    pub split: SplitSpec,
    pub forest: ForestConfig,
    pub shap: ShapConfig,
    pub bins: BinningSpec,
}

fn names_of(ds: &Dataset, subset: &FeatureSubset) -> Vec<String> {
    subset.names(ds).into_iter().map(str::to_owned).collect()
}

/// Marginal entropy of each feature as its privacy cost (train partition).
pub fn entropy_scores(ds: &Dataset, subset: &FeatureSubset, ctx: &ScoringContext) -> Result<ScoreTable> {
    subset.validate(ds.n_features())?;
    let train = split(ds, &ctx.split)?.train;
    let c = subset
        .indices()
        .iter()
        .map(|&f| marginal_entropy(train.feature(f), &ctx.bins))
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::new(ScoreMethod::EntropyPrivacy, subset.indices().to_vec(), names_of(ds, subset), None, Some(c))
}

/// Mutual information with the task labels as utility (train partition).
pub fn mi_scores(ds: &Dataset, subset: &FeatureSubset, ctx: &ScoringContext) -> Result<ScoreTable> {
    subset.validate(ds.n_features())?;
    let train = split(ds, &ctx.split)?.train;
    let v = subset
        .indices()
        .iter()
        .map(|&f| mutual_information(train.feature(f), train.task_labels(), &ctx.bins))
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::new(ScoreMethod::MiUtility, subset.indices().to_vec(), names_of(ds, subset), Some(v), None)
}

/// Normalized MI utility minus normalized entropy privacy score.
pub fn tradeoff_scores(ds: &Dataset, subset: &FeatureSubset, ctx: &ScoringContext) -> Result<ScoreTable> {
    let util = mi_scores(ds, subset, ctx)?.utility.expect("mi utility");
    let privacy = entropy_scores(ds, subset, ctx)?.identifiability.expect("entropy cost");
    let t = tradeoff_score(&util, &privacy)?;
    ScoreTable::new(ScoreMethod::Tradeoff, subset.indices().to_vec(), names_of(ds, subset), Some(t), None)
}

/// Mean over explained rows of the max over classes of |SHAP|, for the task
/// model (v) and the adversary (c).
pub fn shap_scores(ds: &Dataset, subset: &FeatureSubset, ctx: &ScoringContext) -> Result<ScoreTable> {
    subset.validate(ds.n_features())?;
    let parts = split(ds, &ctx.split)?;
    let pair = train_pair(&parts.train, subset, &ctx.forest)?;
    let explain = shapley::explained_rows(&parts.test, &ctx.shap);
    let s_task = shapley(&pair.task, &explain, &parts.train, &ctx.shap)?;
    let s_adv = shapley(&pair.adversary, &explain, &parts.train, &ctx.shap)?;
    ScoreTable::new(
        ScoreMethod::Shap,
        subset.indices().to_vec(),
        names_of(ds, subset),
        Some(s_task.mean_max_abs()),
        Some(s_adv.mean_max_abs()),
    )
}

/// Gini importances of the task model (v) and the adversary (c).
pub fn gini_scores(ds: &Dataset, subset: &FeatureSubset, ctx: &ScoringContext) -> Result<ScoreTable> {
    subset.validate(ds.n_features())?;
    let parts = split(ds, &ctx.split)?;
    let pair = train_pair(&parts.train, subset, &ctx.forest)?;
    ScoreTable::new(
        ScoreMethod::Gini,
        subset.indices().to_vec(),
        names_of(ds, subset),
        Some(pair.task.gini_importance()),
        Some(pair.adversary.gini_importance()),
    )
}

pub fn score_features(ds: &Dataset, subset: &FeatureSubset, method: ScoreMethod, ctx: &ScoringContext) -> Result<ScoreTable> {
    match method {
        ScoreMethod::EntropyPrivacy => entropy_scores(ds, subset, ctx),
        ScoreMethod::MiUtility => mi_scores(ds, subset, ctx),
        ScoreMethod::Tradeoff => tradeoff_scores(ds, subset, ctx),
        ScoreMethod::Shap => shap_scores(ds, subset, ctx),
        ScoreMethod::Gini => gini_scores(ds, subset, ctx),
    }
}
