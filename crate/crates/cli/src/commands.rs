use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use datamin_core::report::{report_curve, run_sweep, solver_label, write_curve};
use datamin_core::solvers::SearchOptions;
use datamin_core::tabular::save_csv;
use datamin_core::{
    dp_noise, evaluate_on, evaluate_pair, generate, greedy_select, hash_features, load_csv, oracle_enumerate,
    pca_transform, score_features, split, Dataset, DpSpec, FeatureSubset, GreedyStrategy, HashSpec, HybridSpec,
    ParameterReport, PcaSpec, ReportMeta, ScoringContext, StopRule, SubsetEvaluation, SweepSolver,
    SynthSpec,
};

use crate::config::{Method, RunConfig};

pub struct Run {
    pub cfg: RunConfig,
    pub timestamp: bool,
}

impl Run {
    fn load(&self) -> Result<Dataset> {
        let path = self.cfg.dataset.as_ref().expect("validated");
        load_csv(path, &self.cfg.task_column, &self.cfg.user_column, self.cfg.na_policy)
            .with_context(|| format!("loading {}", path.display()))
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.cfg.output)
            .with_context(|| format!("creating {}", self.cfg.output.display()))?;
        Ok(&self.cfg.output)
    }

    fn meta(&self, ds: &Dataset, method: String) -> ReportMeta {
        ReportMeta {
            dataset: ds.fingerprint(),
            method,
            seed: self.cfg.forest.seed,
            config: serde_json::to_value(&self.cfg).expect("config serializes"),
            generated_at: self.timestamp.then(now),
        }
    }

    fn ctx(&self) -> ScoringContext {
        ScoringContext {
            split: self.cfg.split,
            forest: self.cfg.forest,
            shap: self.cfg.shap,
            bins: self.cfg.bins,
        }
    }

    fn solver(&self) -> Result<SweepSolver> {
        match self.cfg.method {
            Method::Exhaustive => Ok(SweepSolver::Exhaustive { candidates: None }),
            Method::Hybrid => {
                let mut spec = HybridSpec::new(self.cfg.scoring, self.cfg.keep);
                spec.order = self.cfg.greedy_order();
                spec.shap = self.cfg.shap;
                spec.bins = self.cfg.bins;
                Ok(SweepSolver::Hybrid(spec))
            }
            m => bail!("method {} has no threshold solver", name(m)),
        }
    }

    fn full_eval(&self, ds: &Dataset) -> Result<SubsetEvaluation> {
        Ok(evaluate_pair(ds, &FeatureSubset::full(ds.n_features())?, &self.cfg.split, &self.cfg.forest)?)
    }

    /// Threshold sweep over `thresholds`; writes report.json, curve.csv and
    /// evaluations.csv.
    fn threshold_run(&self, ds: &Dataset, thresholds: &[f64]) -> Result<datamin_core::TradeoffReport> {
        let solver = self.solver()?;
        let opts = SearchOptions {
            progress: Some(Arc::new(progress)),
            ..SearchOptions::default()
        };
        let sweep = run_sweep(ds, thresholds, &solver, self.cfg.base, &self.cfg.split, &self.cfg.forest, &opts)?;
        eprintln!();
        let report = sweep.report(ds, self.meta(ds, solver_label(&solver)));
        let dir = self.out_dir()?;
        write_file(&dir.join("report.json"), report.to_json()?.as_bytes())?;
        let reference = match self.cfg.method {
            Method::Exhaustive => sweep.log.full_set().clone(),
            _ => self.full_eval(ds)?,
        };
        let mut curve = Vec::new();
        write_curve(&report_curve(&report), &reference, &mut curve)?;
        write_file(&dir.join("curve.csv"), &curve)?;
        let mut evals = Vec::new();
        sweep.log.write_csv(&mut evals, ds)?;
        write_file(&dir.join("evaluations.csv"), &evals)?;
        Ok(report)
    }

    /// Greedy selection at every k from d down to 1, or at the configured
    /// stop rule only.
    fn greedy_run(&self, ds: &Dataset, only_stop_rule: bool) -> Result<(ParameterReport, Vec<FeatureSubset>)> {
        let ctx = self.ctx();
        let scores = score_features(ds, &FeatureSubset::full(ds.n_features())?, self.cfg.scoring, &ctx)?;
        let order = self.cfg.greedy_order();
        let rules: Vec<StopRule> = match (only_stop_rule, self.cfg.stop_rule()) {
            (true, Some(rule)) => vec![rule],
            (true, None) => bail!("greedy minimize needs top_k or utility_sum"),
            (false, _) => (1..=ds.n_features()).rev().map(StopRule::TopK).collect(),
        };
        let parts = split(ds, &self.cfg.split)?;
        let reference = evaluate_on(&parts, &FeatureSubset::full(ds.n_features())?, &self.cfg.forest)?;
        let mut points = Vec::new();
        let mut chosen = Vec::new();
        for stop in rules {
            let subset = greedy_select(&scores, &GreedyStrategy { order, stop })?;
            let eval = evaluate_on(&parts, &subset, &self.cfg.forest)?;
            points.push((subset.len() as f64, eval));
            chosen.push(subset);
        }
        let label = format!("greedy:{}:{}", self.cfg.scoring, order);
        let report = ParameterReport::new(self.meta(ds, label), "n_features", &reference, &points);
        let dir = self.out_dir()?;
        write_file(&dir.join("report.json"), report.to_json()?.as_bytes())?;
        let mut curve = Vec::new();
        write_curve(&report.curve(), &reference, &mut curve)?;
        write_file(&dir.join("curve.csv"), &curve)?;
        Ok((report, chosen))
    }

    /// Evaluates a transform at every configured parameter value.
    fn transform_run(&self, ds: &Dataset) -> Result<ParameterReport> {
        let (param, values): (&str, Vec<f64>) = match self.cfg.method {
            Method::Hash => ("buckets", self.cfg.buckets.iter().map(|&k| k as f64).collect()),
            Method::Pca => ("components", self.cfg.components.iter().map(|&k| k as f64).collect()),
            Method::Dp => ("epsilon", self.cfg.epsilon.clone()),
            m => bail!("method {} is not a transform baseline", name(m)),
        };
        if values.is_empty() {
            bail!("no {param} values to sweep");
        }
        let reference = self.full_eval(ds)?;
        let mut points = Vec::with_capacity(values.len());
        for &v in &values {
            let transformed = match self.cfg.method {
                Method::Hash => hash_features(ds, &HashSpec::new(v as usize))?,
                Method::Pca => pca_transform(ds, &PcaSpec::new(v as usize))?,
                _ => dp_noise(
                    ds,
                    &DpSpec {
                        epsilon: v,
                        seed: self.cfg.forest.seed,
                    },
                )?,
            };
            log::info!("{param}={v}");
            points.push((v, self.full_eval(&transformed)?));
        }
        let report = ParameterReport::new(self.meta(ds, name(self.cfg.method).into()), param, &reference, &points);
        let dir = self.out_dir()?;
        write_file(&dir.join("report.json"), report.to_json()?.as_bytes())?;
        let mut curve = Vec::new();
        write_curve(&report.curve(), &reference, &mut curve)?;
        write_file(&dir.join("curve.csv"), &curve)?;
        Ok(report)
    }
}

pub fn minimize(run: &Run) -> Result<()> {
    let ds = run.load()?;
    let (acc, ident, rel_eff, names) = match run.cfg.method {
        Method::Exhaustive | Method::Hybrid => {
            let report = run.threshold_run(&ds, &[run.cfg.threshold])?;
            let row = &report.rows[0];
            (row.accuracy, row.identifiability, row.rel_eff, row.features.clone())
        }
        Method::Greedy => {
            let (report, chosen) = run.greedy_run(&ds, true)?;
            let row = &report.rows[0];
            let names = chosen[0].names(&ds).into_iter().map(str::to_owned).collect();
            (row.accuracy, row.identifiability, row.rel_eff, names)
        }
        m => bail!("method {} transforms features rather than selecting them; use `baseline`", name(m)),
    };
    let mut list = names.join("\n");
    list.push('\n');
    write_file(&run.cfg.output.join("chosen_features.txt"), list.as_bytes())?;
    let rel = rel_eff.map_or("N/A".to_owned(), |r| format!("{r:.3}"));
    println!(
        "accuracy={acc:.4} identifiability={ident:.4} rel_eff={rel} features={}",
        names.len()
    );
    Ok(())
}

pub fn sweep(run: &Run) -> Result<()> {
    let ds = run.load()?;
    match run.cfg.method {
        Method::Exhaustive | Method::Hybrid => print!("{}", run.threshold_run(&ds, &run.cfg.thresholds)?.table()),
        Method::Greedy => print_params(&run.greedy_run(&ds, false)?.0),
        _ => print_params(&run.transform_run(&ds)?),
    }
    Ok(())
}

pub fn baseline(run: &Run) -> Result<()> {
    if !run.cfg.method.is_transform() {
        bail!("baseline needs --method hash, pca or dp");
    }
    let ds = run.load()?;
    print_params(&run.transform_run(&ds)?);
    Ok(())
}

pub fn score(run: &Run) -> Result<()> {
    let ds = run.load()?;
    let table = score_features(&ds, &FeatureSubset::full(ds.n_features())?, run.cfg.scoring, &run.ctx())?;
    let dir = run.out_dir()?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write_file(&dir.join("scores.csv"), &csv)?;
    write_file(&dir.join("scores.json"), table.to_json()?.as_bytes())?;
    std::io::stdout().write_all(&csv)?;
    Ok(())
}

pub struct SynthArgs {
    pub spec: SynthSpec,
    pub out: PathBuf,
    pub oracle: Option<PathBuf>,
    pub task_column: String,
    pub user_column: String,
}

pub fn synth(args: &SynthArgs, run_cfg: &RunConfig) -> Result<()> {
    let ds = generate(&args.spec)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_csv(&ds, &args.out, &args.task_column, &args.user_column)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.oracle {
        oracle_enumerate(&ds, &run_cfg.split, &run_cfg.forest)?.save(path)?;
    }
    eprintln!("wrote {} rows x {} features to {}", ds.rows(), ds.n_features(), args.out.display());
    Ok(())
}

fn print_params(report: &ParameterReport) {
    println!("{:>12} {:>9} {:>9} {:>9} {:>5}", report.parameter, "accuracy", "ident", "rel_eff", "n");
    for r in &report.rows {
        let rel = r.rel_eff.map_or("N/A".to_owned(), |v| format!("{v:.3}"));
        println!(
            "{:>12} {:>9.4} {:>9.4} {:>9} {:>5}",
            r.parameter, r.accuracy, r.identifiability, rel, r.n_features
        );
    }
}

fn name(m: Method) -> &'static str {
    match m {
        Method::Exhaustive => "exhaustive",
        Method::Greedy => "greedy",
        Method::Hybrid => "hybrid",
        Method::Hash => "hash",
        Method::Pca => "pca",
        Method::Dp => "dp",
    }
}

fn progress(done: usize, total: usize) {
    // every 1% and at the end
    let step = (total / 100).max(1);
    if done.is_multiple_of(step) || done == total {
        eprint!("\revaluated {done}/{total} subsets");
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn now() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}
