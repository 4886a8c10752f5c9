//! `agefair`: curation and fairness-evaluation pipeline.

mod commands;
mod config;
mod exit;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "agefair", version, about = "Age-stratified deepfake dataset curation and fairness evaluation")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "AGEFAIR_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic stage; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a config entry, e.g. `--set detector.max_epochs=5`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Drop malformed manifest rows instead of failing.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count records by label, age group and source.
    Analyze(AnalyzeArgs),
    /// Undersample video sources to the mean and top up real groups.
    Balance(BalanceArgs),
    /// Plan synthetic fakes needed per age group.
    PlanAug(PlanAugArgs),
    /// Pair source faces with target videos.
    Match(MatchArgs),
    /// SSIM/PSNR gating of generated frames.
    Quality(QualityArgs),
    /// Stratified train/test split.
    Split(SplitArgs),
    /// Train the reference detector, optionally scoring a test split.
    Train(TrainArgs),
    /// AUC/pAUC/EER per context and age group.
    Evaluate(EvaluateArgs),
    /// Render tables and charts from metrics and distributions.
    Report(ReportArgs),
    /// Run every stage in order.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Distribution file (`label,age_group,source,count`).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the aligned text table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Directory for per-source age-share pie charts.
    #[arg(long)]
    pub charts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanAugArgs {
    /// Pre-balancing distribution, as written by `analyze`.
    #[arg(long)]
    pub distribution: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Fake target; defaults to the mean target of the distribution.
    #[arg(long)]
    pub target: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub sources: Option<PathBuf>,
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub one_to_one: bool,
    #[arg(long)]
    pub min_cosine: Option<f64>,
    #[arg(long)]
    pub min_combined: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Per-pair metrics (`id,ssim,psnr_db,pass`).
    #[arg(long)]
    pub out: PathBuf,
    /// Aggregate summary; printed to stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub min_ssim: Option<f64>,
    #[arg(long)]
    pub min_psnr_db: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training split manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Checkpoint output.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Manifest to score after training.
    #[arg(long, requires = "scores")]
    pub test_manifest: Option<PathBuf>,
    #[arg(long, requires = "test_manifest")]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// One or more score files; their rows are pooled.
    #[arg(long, required = true, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    /// Metric rows (`model,train,test,group,auc,pauc,eer,n_pos,n_neg`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rendered tables; printed to stdout when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub max_fpr: Option<f64>,
    #[arg(long)]
    pub pauc_normalization: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Metric rows as written by `evaluate`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Distribution as written by `analyze`.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err) as u8)
        }
    }
}
