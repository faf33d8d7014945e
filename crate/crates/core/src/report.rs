//! Relative effectiveness, threshold sweeps, parameter sweeps for baselines
//! and the accuracy-loss / identifiability-reduction curve export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attribution::ScoreTable;
use crate::error::{Error, Result};
use crate::model::{evaluate_on, ForestConfig, SubsetEvaluation};
use crate::solvers::{
    evaluate_all, greedy_select, preselect, result_from_log, BaseAccuracy, EvaluationLog, GreedyOrder, GreedyStrategy,
    HybridSpec, MethodRecord, MinimizationResult, SearchOptions, StopRule, ThresholdPolicy,
};
use crate::tabular::{split, Dataset, FeatureSubset, SplitSpec};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Thresholds used throughout the result tables.
pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0];

/// `ln((ident_i - ident_0) / (acc_i - acc_0))`, or `None` when accuracy is
/// unchanged or the ratio is not positive.
pub fn relative_effectiveness(acc_i: f64, ident_i: f64, acc_0: f64, ident_0: f64) -> Option<f64> {
    let d_acc = acc_i - acc_0;
    if d_acc == 0.0 {
        return None;
    }
    let ratio = (ident_i - ident_0) / d_acc;
    (ratio > 0.0 && ratio.is_finite()).then(|| ratio.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub threshold: f64,
    pub accuracy: f64,
    pub identifiability: f64,
    pub rel_eff: Option<f64>,
    pub n_features: usize,
    pub subset: Vec<usize>,
    pub features: Vec<String>,
}

impl TradeoffRow {
    fn from_eval(threshold: f64, eval: &SubsetEvaluation, reference: Option<&SubsetEvaluation>, ds: &Dataset) -> Self {
        Self {
            threshold,
            accuracy: eval.task_accuracy,
            identifiability: eval.identifiability,
            rel_eff: reference.and_then(|r| relative_effectiveness(eval.task_accuracy, eval.identifiability, r.task_accuracy, r.identifiability)),
            n_features: eval.subset.len(),
            subset: eval.subset.indices().to_vec(),
            features: eval.subset.names(ds).into_iter().map(str::to_owned).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

/// Threshold sweep: one row per threshold, relative effectiveness against
/// the threshold-0 row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub version: u32,
    pub meta: ReportMeta,
    /// Which accuracy the thresholds relax.
    pub base: BaseAccuracy,
    pub baseline: TradeoffRow,
    pub rows: Vec<TradeoffRow>,
}

impl TradeoffReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Renders the rows as a plain-text table (percentages).
    pub fn table(&self) -> String {
        let mut out = String::from("Thr.\tAcc.\tIdent.\tRel. Eff.\t# Feat.\n");
        for r in &self.rows {
            let rel = r.rel_eff.map_or("N/A".to_owned(), |v| format!("{v:.3}"));
            out.push_str(&format!(
                "{}\t{:.2}%\t{:.2}%\t{}\t{}\n",
                r.threshold,
                r.accuracy * 100.0,
                r.identifiability * 100.0,
                rel,
                r.n_features
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepSolver {
    /// Exhaustive over the given candidates (all features when `None`).
    Exhaustive { candidates: Option<FeatureSubset> },
    Hybrid(HybridSpec),
}

/// Results of one evaluation log read at several thresholds.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub log: EvaluationLog,
    pub baseline: MinimizationResult,
    pub results: Vec<MinimizationResult>,
}

fn check_thresholds(thresholds: &[f64]) -> Result<Vec<f64>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("threshold list is empty".into()));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!("threshold {t} outside [0,1]")));
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

/// Evaluates the candidate subsets once and applies every threshold to the
/// same log.
pub fn run_sweep(
    ds: &Dataset,
    thresholds: &[f64],
    solver: &SweepSolver,
    base: BaseAccuracy,
    split_spec: &SplitSpec,
    cfg: &ForestConfig,
    opts: &SearchOptions,
) -> Result<Sweep> {
    let thresholds = check_thresholds(thresholds)?;
    let (log, method) = match solver {
        SweepSolver::Exhaustive { candidates } => {
            let candidates = match candidates {
                Some(c) => c.clone(),
                None => FeatureSubset::full(ds.n_features())?,
            };
            (evaluate_all(ds, &candidates, split_spec, cfg, opts)?, MethodRecord::Exhaustive)
        }
        SweepSolver::Hybrid(spec) => {
            let (_, kept) = preselect(ds, split_spec, cfg, spec, opts.cap)?;
            let log = evaluate_all(ds, &kept, split_spec, cfg, opts)?;
            let method = MethodRecord::Hybrid {
                scoring: spec.scoring,
                order: spec.order,
                keep: spec.keep,
                preselected: kept,
            };
            (log, method)
        }
    };
    let baseline = result_from_log(&log, &ThresholdPolicy::new(0.0, base)?, method.clone())?;
    let results = thresholds
        .iter()
        .map(|&t| result_from_log(&log, &ThresholdPolicy::new(t, base)?, method.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { log, baseline, results })
}

impl Sweep {
    pub fn report(&self, ds: &Dataset, meta: ReportMeta) -> TradeoffReport {
        let reference = &self.baseline.evaluation;
        TradeoffReport {
            version: REPORT_FORMAT_VERSION,
            meta,
            base: self.baseline.policy.base,
            baseline: TradeoffRow::from_eval(0.0, reference, None, ds),
            rows: self
                .results
                .iter()
                .map(|r| TradeoffRow::from_eval(r.policy.threshold, &r.evaluation, Some(reference), ds))
                .collect(),
        }
    }
}

pub fn solver_label(solver: &SweepSolver) -> String {
    match solver {
        SweepSolver::Exhaustive { .. } => "exhaustive".into(),
        SweepSolver::Hybrid(h) => format!("hybrid:{}:{}:{}", h.scoring, h.order, h.keep),
    }
}

/// Threshold sweep with metadata derived from the inputs.
pub fn threshold_sweep(
    ds: &Dataset,
    thresholds: &[f64],
    solver: &SweepSolver,
    base: BaseAccuracy,
    split_spec: &SplitSpec,
    cfg: &ForestConfig,
) -> Result<TradeoffReport> {
    let sweep = run_sweep(ds, thresholds, solver, base, split_spec, cfg, &SearchOptions::default())?;
    let meta = ReportMeta {
        dataset: ds.fingerprint(),
        method: solver_label(solver),
        seed: cfg.seed,
        config: serde_json::json!({ "split": split_spec, "forest": cfg, "solver": solver }),
        generated_at: None,
    };
    Ok(sweep.report(ds, meta))
}

/// One setting of a swept parameter (bucket count, components, epsilon, k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub parameter: f64,
    pub accuracy: f64,
    pub identifiability: f64,
    pub rel_eff: Option<f64>,
    pub n_features: usize,
}

/// Full-feature evaluation a parameter sweep is compared with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub accuracy: f64,
    pub identifiability: f64,
    pub n_features: usize,
}

/// Parameter sweep for transforms and greedy selection, compared with the
/// untransformed full-feature evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterReport {
    pub version: u32,
    pub meta: ReportMeta,
    pub parameter: String,
    pub reference: ReferenceRow,
    pub rows: Vec<ParameterRow>,
}

impl ParameterReport {
    pub fn new(meta: ReportMeta, parameter: &str, reference: &SubsetEvaluation, points: &[(f64, SubsetEvaluation)]) -> Self {
        Self {
            version: REPORT_FORMAT_VERSION,
            meta,
            parameter: parameter.to_owned(),
            reference: ReferenceRow {
                accuracy: reference.task_accuracy,
                identifiability: reference.identifiability,
                n_features: reference.subset.len(),
            },
            rows: points
                .iter()
                .map(|(p, e)| ParameterRow {
                    parameter: *p,
                    accuracy: e.task_accuracy,
                    identifiability: e.identifiability,
                    rel_eff: relative_effectiveness(e.task_accuracy, e.identifiability, reference.task_accuracy, reference.identifiability),
                    n_features: e.subset.len(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn curve(&self) -> Vec<CurvePoint> {
        self.rows
            .iter()
            .map(|r| CurvePoint {
                n_features: r.n_features,
                accuracy: r.accuracy,
                identifiability: r.identifiability,
                method: format!("{}:{}={}", self.meta.method, self.parameter, r.parameter),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_features: usize,
    pub accuracy: f64,
    pub identifiability: f64,
    pub method: String,
}

impl CurvePoint {
    pub fn from_eval(eval: &SubsetEvaluation, method: &str) -> Self {
        Self {
            n_features: eval.subset.len(),
            accuracy: eval.task_accuracy,
            identifiability: eval.identifiability,
            method: method.to_owned(),
        }
    }
}

/// Writes `n_features,accuracy_loss,identifiability_reduction,method`, with
/// both differences taken against the full-feature `reference`.
pub fn write_curve<W: Write>(points: &[CurvePoint], reference: &SubsetEvaluation, writer: W) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("curve has no points".into()));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["n_features", "accuracy_loss", "identifiability_reduction", "method"])?;
    for p in points {
        wtr.write_record([
            p.n_features.to_string(),
            (reference.task_accuracy - p.accuracy).to_string(),
            (reference.identifiability - p.identifiability).to_string(),
            p.method.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn curve_export(points: &[CurvePoint], reference: &SubsetEvaluation, path: impl AsRef<Path>) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("curve has no points".into()));
    }
    let file = std::fs::File::create(path)?;
    write_curve(points, reference, std::io::BufWriter::new(file))
}

/// Points of a threshold report.
pub fn report_curve(report: &TradeoffReport) -> Vec<CurvePoint> {
    report
        .rows
        .iter()
        .map(|r| CurvePoint {
            n_features: r.n_features,
            accuracy: r.accuracy,
            identifiability: r.identifiability,
            method: format!("{}@{}", report.meta.method, r.threshold),
        })
        .collect()
}

/// Evaluates the greedy top-k subset for k = d down to 1. The first point is
/// the full scored set.
pub fn greedy_curve(ds: &Dataset, scores: &ScoreTable, order: GreedyOrder, split_spec: &SplitSpec, cfg: &ForestConfig) -> Result<Vec<CurvePoint>> {
    let parts = split(ds, split_spec)?;
    let label = format!("greedy:{}:{}", scores.method, order);
    (1..=scores.len())
        .rev()
        .map(|k| {
            let subset = greedy_select(scores, &GreedyStrategy { order, stop: StopRule::TopK(k) })?;
            Ok(CurvePoint::from_eval(&evaluate_on(&parts, &subset, cfg)?, &label))
        })
        .collect()
}
