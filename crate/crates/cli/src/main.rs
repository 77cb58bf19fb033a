//! `plainlang`: ingest → split → adapt / export-ft → score → evaluate → report.

mod commands;
mod config;
mod error;
mod manifest;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "plainlang", version, about = "Plain-language adaptation workbench for biomedical abstracts")]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize the dataset JSON into corpus JSON-lines.
    Ingest(IngestArgs),
    /// Pmid-grouped train/validation split.
    Split(SplitArgs),
    /// Adapt the samples of one split side with a strategy.
    Adapt(AdaptArgs),
    /// Write fine-tuning chat JSON-lines for one split side.
    ExportFt(ExportFtArgs),
    /// Build (and optionally submit) a fine-tuning job description.
    FtJob(FtJobArgs),
    /// FK/SMOG readability report for a run, the gold adaptations or the sources.
    Score(ScoreArgs),
    /// Paired t-tests of a report against a reference report.
    Evaluate(EvaluateArgs),
    /// Serve blinded rating sessions over HTTP.
    RateServe(RateServeArgs),
    /// Emit CSV or JSON report tables.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Train share of each question's pmids [default: 0.8].
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Shuffle seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyArg {
    Baseline,
    TwoAgents,
    Finetuned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideArg {
    Train,
    Validation,
}

#[derive(Args, Debug)]
pub struct AdaptArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long, value_enum, default_value = "validation")]
    pub side: SideArg,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// echo | mock | randomized | http [default: mock].
    #[arg(long)]
    pub backend: Option<String>,
    /// Canned replies for the mock backend: JSON object of message digest → reply.
    #[arg(long)]
    pub mock_replies: Option<PathBuf>,
    /// Seed of the randomized mock backend.
    #[arg(long, default_value_t = 0)]
    pub mock_seed: u64,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub repair_attempts: Option<u32>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    /// Only the first N samples (in id order).
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportFtArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long, value_enum, default_value = "train")]
    pub side: SideArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FtJobArgs {
    #[arg(long)]
    pub training_file: PathBuf,
    #[arg(long)]
    pub validation_file: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub batch_size: Option<u32>,
    #[arg(long)]
    pub lr_multiplier: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Submit to the provider; training/validation ids must then be uploaded file ids.
    #[arg(long)]
    pub submit: bool,
    #[arg(long)]
    pub training_file_id: Option<String>,
    #[arg(long)]
    pub validation_file_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreSource {
    Run,
    GroundTruth,
    Abstract,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "validation")]
    pub side: SideArg,
    #[arg(long, value_enum, default_value = "run")]
    pub source: ScoreSource,
    /// Run file (required with --source run).
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// Row label; defaults to the source name or the run file stem.
    #[arg(long)]
    pub system_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Report(s) produced by `score`.
    #[arg(long, required = true, num_args = 1..)]
    pub report: Vec<PathBuf>,
    /// Reference report, normally the ground-truth one.
    #[arg(long)]
    pub against: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RateServeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// `SYSTEM_ID=run.jsonl`, repeatable.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    /// Directory holding sessions.jsonl and ratings.jsonl.
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Static files (the rating UI) served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long, num_args = 1..)]
    pub reports: Vec<PathBuf>,
    /// Comparison file written by `evaluate`.
    #[arg(long)]
    pub comparisons: Option<PathBuf>,
    /// Ratings JSON-lines; one Likert row per system found.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = Config::load(cli.config.as_deref()).and_then(|config| match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Split(a) => commands::split(&a, &config),
        Command::Adapt(a) => commands::adapt(&a, &config),
        Command::ExportFt(a) => commands::export_ft(&a),
        Command::FtJob(a) => commands::ft_job(&a, &config),
        Command::Score(a) => commands::score(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::RateServe(a) => commands::rate_serve(&a),
        Command::Report(a) => commands::report(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
