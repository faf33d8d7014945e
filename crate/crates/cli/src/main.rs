//! `datamin`: feature minimization from the command line.
//!
//! Every data-driven subcommand reads an optional JSON config (`--config`)
//! and applies flag overrides on top. Results go to the `--out` directory;
//! progress and diagnostics go to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use datamin_core::SynthSpec;

use crate::commands::{Run, SynthArgs};
use crate::config::{RunConfig, RunFlags};

#[derive(Parser)]
#[command(name = "datamin", version, about = "Feature minimization against user re-identification")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose a feature subset at one threshold
    Minimize(RunFlags),
    /// Threshold sweep, greedy k sweep or transform sweep, per method
    Sweep(RunFlags),
    /// Per-feature utility and identifiability scores
    Score(RunFlags),
    /// Hashing, PCA or DP baseline sweep
    Baseline(RunFlags),
    /// Write a synthetic dataset with planted feature roles
    Synth(SynthFlags),
}

#[derive(Args)]
struct SynthFlags {
    /// dense | sparse | dense_matched; other flags override its fields
    #[arg(long)]
    preset: Option<String>,
    /// Full SynthSpec as JSON; other flags override its fields
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    task_only: Option<usize>,
    #[arg(long)]
    user_only: Option<usize>,
    #[arg(long)]
    shared: Option<usize>,
    #[arg(long)]
    noise: Option<usize>,
    #[arg(long)]
    signal: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the brute-force oracle table (at most 10 features)
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Forest size for the oracle
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long, default_value = "task")]
    task_column: String,
    #[arg(long, default_value = "user")]
    user_column: String,
}

impl SynthFlags {
    fn spec(&self) -> Result<SynthSpec> {
        let mut spec = match (&self.preset, &self.spec) {
            (Some(p), _) => match p.as_str() {
                "dense" => SynthSpec::dense(self.seed),
                "sparse" => SynthSpec::sparse(self.seed),
                "dense_matched" => SynthSpec::dense_matched(self.seed),
                other => anyhow::bail!("unknown preset `{other}` (dense, sparse, dense_matched)"),
            },
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, None) => SynthSpec {
                seed: self.seed,
                ..SynthSpec::dense(self.seed)
            },
        };
        let fields = [
            (&mut spec.n_rows, self.rows),
            (&mut spec.n_classes, self.classes),
            (&mut spec.n_users, self.users),
            (&mut spec.task_only, self.task_only),
            (&mut spec.user_only, self.user_only),
            (&mut spec.shared, self.shared),
            (&mut spec.noise, self.noise),
        ];
        for (field, flag) in fields {
            if let Some(v) = flag {
                *field = v;
            }
        }
        if let Some(s) = self.signal {
            spec.signal_strength = s;
        }
        if self.spec.is_some() && self.seed != 0 {
            spec.seed = self.seed;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Minimize(f) => commands::minimize(&runner(&f)?),
        Command::Sweep(f) => commands::sweep(&runner(&f)?),
        Command::Score(f) => commands::score(&runner(&f)?),
        Command::Baseline(f) => commands::baseline(&runner(&f)?),
        Command::Synth(f) => {
            let mut cfg = RunConfig::default();
            if let Some(t) = f.trees {
                cfg.forest.n_trees = t;
            }
            let args = SynthArgs {
                spec: f.spec()?,
                out: f.out.clone(),
                oracle: f.oracle.clone(),
                task_column: f.task_column.clone(),
                user_column: f.user_column.clone(),
            };
            commands::synth(&args, &cfg)
        }
    }
}

fn runner(flags: &RunFlags) -> Result<Run> {
    Ok(Run {
        cfg: flags.resolve()?,
        timestamp: flags.timestamp,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
