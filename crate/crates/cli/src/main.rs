mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "collider-audit",
    version,
    about = "Situation testing of black-box classifiers with collider-bias correction"
)]
struct Cli {
    /// Worker threads for auditing. Defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate the synthetic benchmark with ground-truth scores.
    Gen(GenArgs),
    /// Score every test record with the naive and unbiased situation tests.
    Audit(AuditArgs),
    /// Compare both tests against a ground-truth column.
    Eval(EvalArgs),
    /// Check a DAG for use in an audit and report colliders.
    CheckDag(CheckDagArgs),
    /// Regenerate the Race / Salary / Suburb collider scenario end to end.
    DemoCollider(DemoArgs),
    /// Fit the distribution of the outcome's descendants from data.
    FitDist(FitDistArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Number of records.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale of the protected attribute's effect.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Weight of the outcome in the collider.
    #[arg(long = "collider-y", default_value_t = 1.0)]
    pub collider_y: f64,
    /// Weight of the protected attribute in the collider.
    #[arg(long = "collider-a", default_value_t = 1.0)]
    pub collider_a: f64,
    /// Upper bound of the uniform collider noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Output CSV. The DAG is written next to it as `<out>.dag`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Inputs shared by `audit` and `eval`.
#[derive(Debug, Args, Serialize)]
pub struct AuditInputs {
    /// Causal DAG, edge-list text or JSON.
    #[arg(long)]
    pub dag: PathBuf,
    /// Records to audit (CSV with header).
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON. Inferred from the CSV when absent.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub protected: String,
    #[arg(long)]
    pub outcome: String,
    /// Training CSV for built-in models.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Comma-separated model features. Defaults to every DAG node in the
    /// schema except the outcome.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Distribution JSON over the outcome's descendants.
    #[arg(long, conflicts_with = "fit_dist_from")]
    pub dist: Option<PathBuf>,
    /// CSV to fit the descendants' distribution from.
    #[arg(long)]
    pub fit_dist_from: Option<PathBuf>,
    /// Equal-frequency bins per continuous descendant when fitting.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[command(flatten)]
    pub inputs: AuditInputs,
    /// `lr`, `nb`, `knn[:k=N]`, `external:<command>` or `lookup:<table.json>`.
    #[arg(long)]
    pub model: String,
    /// Flag individuals whose unbiased score exceeds this threshold.
    #[arg(long)]
    pub alpha: f64,
    /// Output prefix: writes `<out>.csv`, `<out>.json` and `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub inputs: AuditInputs,
    /// Model spec, repeatable. One comparison row per model.
    #[arg(long, required = true)]
    pub model: Vec<String>,
    /// Column holding the true discrimination score.
    #[arg(long, default_value = "true_ds")]
    pub truth_column: String,
    /// Output prefix: writes `<out>.txt`, `<out>.json`, `<out>.records.csv`
    /// and `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckDagArgs {
    #[arg(long)]
    pub dag: PathBuf,
    #[arg(long)]
    pub protected: String,
    #[arg(long)]
    pub outcome: String,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report and a manifest to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DemoArgs {
    /// Individuals sampled from the scenario.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output prefix for the DAG, data, lookup model, distribution and report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitDistArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// DAG used to find the outcome's descendants.
    #[arg(long)]
    pub dag: PathBuf,
    #[arg(long)]
    pub protected: String,
    #[arg(long)]
    pub outcome: String,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Fit these variables instead of the outcome's descendants.
    #[arg(long, value_delimiter = ',')]
    pub variables: Option<Vec<String>>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub bins: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Gen(a) => commands::generate(a),
        Command::Audit(a) => commands::audit(a),
        Command::Eval(a) => commands::eval(a),
        Command::CheckDag(a) => commands::check_dag(a),
        Command::DemoCollider(a) => commands::demo(a),
        Command::FitDist(a) => commands::fit_dist(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
