use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use plainlang::adapters::{read_results_jsonl, run_strategy, write_results_jsonl, AdaptationInput, AdapterConfig, Strategy};
use plainlang::corpus::{load_corpus, read_corpus_jsonl, split_corpus, validate_alignment, write_corpus_jsonl, Corpus, Side, SplitAssignment};
use plainlang::evaluation::{
    aggregate_likert, compare_to_ground_truth, documents_from_results, emit_report, ground_truth_documents, read_ratings_jsonl,
    score_run, source_documents, ComparisonRow, ReadabilityReport, ReportBundle, ReportFormat,
};
use plainlang::llm_gateway::finetune::{build_finetune_job, export_finetune_jsonl, FinetuneConfig};
use plainlang::llm_gateway::http::HttpBackend;
use plainlang::llm_gateway::mock::{EchoBackend, MockBackend, RandomizedBackend};
use plainlang::llm_gateway::{Backend, Gateway, Transcript, DEFAULT_CONCURRENCY};
use plainlang_rating::{Pool, RatingService};
use serde_json::json;

use crate::config::Config;
use crate::error::{io, Category, CliError, Result};
use crate::manifest::RunManifest;
use crate::*;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_RATIO: f64 = 0.8;
const DEFAULT_MODEL: &str = "gpt-4o-mini-2024-07-18";

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Train => Side::Train,
            SideArg::Validation => Side::Validation,
        }
    }
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Baseline => Strategy::Baseline,
            StrategyArg::TwoAgents => Strategy::TwoAgents,
            StrategyArg::Finetuned => Strategy::Finetuned,
        }
    }
}

/// Normalized JSON-lines or the raw dataset JSON, by extension.
fn open_corpus(path: &Path) -> Result<Corpus> {
    let corpus = if path.extension().is_some_and(|e| e == "jsonl") { read_corpus_jsonl(path)? } else { load_corpus(path)? };
    Ok(corpus)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let body = serde_json::to_string_pretty(value).expect("serializes") + "\n";
    std::fs::write(path, body).map_err(io(path))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let mut m = RunManifest::start("ingest", json!({"input": a.input, "out": a.out}));
    m.input(&a.input)?;
    let corpus = load_corpus(&a.input)?;
    let report = validate_alignment(&corpus);
    for v in &report.violations {
        log::warn!("unaligned adaptation {}: {} source vs {} target sentences", v.sample_id, v.source_len, v.target_len);
    }
    write_corpus_jsonl(&corpus, &a.out)?;
    println!("{} abstracts, {} adaptations ({} unaligned)", report.abstracts, report.adaptations, report.violations.len());
    m.summary = serde_json::to_value(&report).expect("report serializes");
    m.write(&a.out)?;
    Ok(())
}

pub fn split(a: &SplitArgs, cfg: &Config) -> Result<()> {
    let ratio = a.ratio.or(cfg.ratio).unwrap_or(DEFAULT_RATIO);
    let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let mut m = RunManifest::start("split", json!({"corpus": a.corpus, "ratio": ratio, "seed": seed}));
    m.input(&a.corpus)?;
    m.seeds.insert("split".into(), seed);
    let corpus = open_corpus(&a.corpus)?;
    let split = split_corpus(&corpus, ratio, seed)?;
    for w in &split.warnings {
        log::warn!("{w}");
    }
    write_json(&a.out, &split)?;
    println!(
        "train: {} pmids / {} samples; validation: {} pmids / {} samples",
        split.train_pmids.len(),
        split.sample_counts.train,
        split.validation_pmids.len(),
        split.sample_counts.validation
    );
    m.summary = json!({"sample_counts": split.sample_counts, "warnings": split.warnings});
    m.write(&a.out)?;
    Ok(())
}

fn make_backend(name: &str, a: &AdaptArgs) -> Result<Box<dyn Backend>> {
    Ok(match name {
        "echo" => Box::new(EchoBackend),
        "mock" => match &a.mock_replies {
            Some(p) => Box::new(MockBackend::from_map(read_json::<HashMap<String, String>>(p)?).with_echo_fallback()),
            None => Box::new(MockBackend::new().with_echo_fallback()),
        },
        "randomized" => Box::new(RandomizedBackend { seed: a.mock_seed, ..Default::default() }),
        "http" => Box::new(HttpBackend::from_env()?),
        other => return Err(CliError::usage(format!("unknown backend {other:?} (echo|mock|randomized|http)"))),
    })
}

pub fn adapt(a: &AdaptArgs, cfg: &Config) -> Result<()> {
    let backend_name = a.backend.clone().or_else(|| cfg.backend.clone()).unwrap_or_else(|| "mock".into());
    let mut adapter = AdapterConfig::new(a.model.clone().or_else(|| cfg.model.clone()).unwrap_or_else(|| DEFAULT_MODEL.into()));
    adapter.rounds = a.rounds.or(cfg.rounds).unwrap_or(adapter.rounds);
    adapter.repair_attempts = a.repair_attempts.or(cfg.repair_attempts).unwrap_or(adapter.repair_attempts);
    adapter.temperature = a.temperature.or(cfg.temperature).unwrap_or(adapter.temperature);
    adapter.max_retries = a.max_retries.or(cfg.max_retries).unwrap_or(adapter.max_retries);
    adapter.timeout_secs = a.timeout_secs.or(cfg.timeout_secs).unwrap_or(adapter.timeout_secs);
    let concurrency = a.concurrency.or(cfg.concurrency).unwrap_or(DEFAULT_CONCURRENCY);
    if concurrency == 0 {
        return Err(CliError::usage("--concurrency must be positive"));
    }
    let strategy = Strategy::from(a.strategy);

    let mut m = RunManifest::start(
        "adapt",
        json!({
            "strategy": strategy, "backend": backend_name, "adapter": adapter, "concurrency": concurrency,
            "side": a.side, "limit": a.limit, "corpus": a.corpus, "split": a.split,
        }),
    );
    m.input(&a.corpus)?;
    m.input(&a.split)?;
    if let Some(p) = &a.mock_replies {
        m.input(p)?;
    }
    m.prompts();
    if backend_name == "randomized" {
        m.seeds.insert("mock".into(), a.mock_seed);
    }

    let corpus = open_corpus(&a.corpus)?;
    let split: SplitAssignment = SplitAssignment::read(&a.split)?;
    let wanted: BTreeSet<_> = split.sample_ids(a.side.into()).iter().collect();
    let mut inputs: Vec<AdaptationInput> = corpus.samples().filter(|s| wanted.contains(&s.id())).map(AdaptationInput::from).collect();
    inputs.sort_by(|x, y| x.sample_id.cmp(&y.sample_id));
    if let Some(n) = a.limit {
        inputs.truncate(n);
    }

    let transcript_path = sibling(&a.out, ".transcript.jsonl");
    let transcript = Transcript::to_file(&transcript_path).map_err(io(&transcript_path))?;
    let gateway = Gateway::new(make_backend(&backend_name, a)?).with_transcript(transcript).with_concurrency(concurrency);
    let out = run_strategy(strategy, &inputs, &adapter, &gateway);
    write_results_jsonl(&out.results, &a.out).map_err(io(&a.out))?;
    if let Some(e) = gateway.transcript().write_error() {
        log::warn!("transcript: {e}");
    }

    println!("{} adapted, {} failed ({} samples)", out.results.len(), out.failures.len(), inputs.len());
    for f in &out.failures {
        eprintln!("failed {}: {}", f.sample_id, f.error);
    }
    m.outputs.push(transcript_path);
    m.summary = json!({
        "samples": inputs.len(),
        "adapted": out.results.len(),
        "repairs": out.results.iter().map(|r| r.retry_count).sum::<u32>(),
        "failures": out.failures,
    });
    m.write(&a.out)?;
    match out.failures.first() {
        None => Ok(()),
        Some(_) if out.failures.iter().any(|f| f.network) => Err(CliError::new(Category::Network, format!("{} sample(s) failed", out.failures.len()))),
        Some(_) => Err(CliError::internal(format!("{} sample(s) failed", out.failures.len()))),
    }
}

pub fn export_ft(a: &ExportFtArgs) -> Result<()> {
    let mut m = RunManifest::start("export-ft", json!({"corpus": a.corpus, "split": a.split, "side": a.side}));
    m.input(&a.corpus)?;
    m.input(&a.split)?;
    m.prompts();
    let corpus = open_corpus(&a.corpus)?;
    let split = SplitAssignment::read(&a.split)?;
    let summary = export_finetune_jsonl(&corpus, &split, a.side.into(), &a.out)?;
    println!("{} records ({} unaligned skipped)", summary.records, summary.skipped_unaligned);
    m.summary = serde_json::to_value(summary).expect("summary serializes");
    m.write(&a.out)?;
    Ok(())
}

pub fn ft_job(a: &FtJobArgs, cfg: &Config) -> Result<()> {
    let d = FinetuneConfig::default();
    let f = &cfg.finetune;
    let config = FinetuneConfig {
        model: a.model.clone().or_else(|| f.model.clone()).unwrap_or(d.model),
        epochs: a.epochs.or(f.epochs).unwrap_or(d.epochs),
        batch_size: a.batch_size.or(f.batch_size).unwrap_or(d.batch_size),
        lr_multiplier: a.lr_multiplier.or(f.lr_multiplier).unwrap_or(d.lr_multiplier),
        random_seed: a.seed.or(f.seed).unwrap_or(d.random_seed),
        training_file: a.training_file.clone(),
        validation_file: a.validation_file.clone(),
    };
    let mut m = RunManifest::start("ft-job", &config);
    m.input(&a.training_file)?;
    if let Some(v) = &a.validation_file {
        m.input(v)?;
    }
    m.seeds.insert("finetune".into(), config.random_seed);
    let mut payload = build_finetune_job(&config)?;
    if a.submit {
        payload.training_file = a.training_file_id.clone().ok_or_else(|| CliError::usage("--submit needs --training-file-id"))?;
        if payload.validation_file.is_some() {
            payload.validation_file = Some(a.validation_file_id.clone().ok_or_else(|| CliError::usage("--submit needs --validation-file-id"))?);
        }
    }
    write_json(&a.out, &payload)?;
    if a.submit {
        let submission = HttpBackend::from_env()?.submit_finetune_job(&payload)?;
        println!("submitted job {} ({})", submission.job_id, submission.status);
        m.summary = serde_json::to_value(&submission).expect("serializes");
    } else {
        println!("job payload written to {}", a.out.display());
    }
    m.write(&a.out)?;
    Ok(())
}

pub fn score(a: &ScoreArgs) -> Result<()> {
    let mut m = RunManifest::start("score", json!({"corpus": a.corpus, "split": a.split, "side": a.side, "source": a.source, "run": a.run}));
    m.input(&a.corpus)?;
    let corpus = open_corpus(&a.corpus)?;
    let split = |m: &mut RunManifest| -> Result<SplitAssignment> {
        let p = a.split.as_ref().ok_or_else(|| CliError::usage("--split is required for this source"))?;
        m.input(p)?;
        Ok(SplitAssignment::read(p)?)
    };
    let (default_id, documents) = match a.source {
        ScoreSource::Run => {
            let run = a.run.as_ref().ok_or_else(|| CliError::usage("--run is required with --source run"))?;
            m.input(run)?;
            let results = read_results_jsonl(run).map_err(io(run))?;
            let stem = run.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
            (stem, documents_from_results(&results))
        }
        ScoreSource::GroundTruth => ("ground_truth".to_string(), ground_truth_documents(&corpus, &split(&mut m)?, a.side.into())),
        ScoreSource::Abstract => ("abstract".to_string(), source_documents(&corpus, &split(&mut m)?, a.side.into())),
    };
    let system_id = a.system_id.clone().unwrap_or(default_id);
    let report = score_run(&system_id, &documents, &corpus)?;
    report.check_consistency()?;
    let s = &report.summary;
    println!(
        "{system_id}: n={} FK {:.2} (SD={:.2}) SMOG {:.2} (SD={:.2}); {} SMOG low-confidence, {} empty excluded",
        s.fk_grade.n, s.fk_grade.mean, s.fk_grade.sd, s.smog_index.mean, s.smog_index.sd, s.smog_low_confidence_count, report.excluded_empty.len()
    );
    write_json(&a.out, &report)?;
    m.summary = serde_json::to_value(&report.summary).expect("serializes");
    m.write(&a.out)?;
    Ok(())
}

fn read_report(path: &Path) -> Result<ReadabilityReport> {
    let r: ReadabilityReport = read_json(path)?;
    r.check_consistency().map_err(|e| CliError::input(e.to_string()).context(path.display()))?;
    Ok(r)
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut m = RunManifest::start("evaluate", json!({"reports": a.report, "against": a.against}));
    m.input(&a.against)?;
    let reference = read_report(&a.against)?;
    let mut rows = Vec::new();
    for p in &a.report {
        m.input(p)?;
        let report = read_report(p)?;
        let row = compare_to_ground_truth(&report, &reference).map_err(|e| CliError::from(e).context(p.display()))?;
        println!(
            "{}: n={} FK Δ{:+.2} p={} | SMOG Δ{:+.2} p={}",
            row.system_id,
            row.n_pairs,
            row.fk_grade.delta_mean,
            row.fk_grade.p_display(),
            row.smog_index.delta_mean,
            row.smog_index.p_display()
        );
        rows.push(row);
    }
    write_json(&a.out, &rows)?;
    m.write(&a.out)?;
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut m = RunManifest::start("report", json!({"reports": a.reports, "comparisons": a.comparisons, "ratings": a.ratings}));
    let mut bundle = ReportBundle::default();
    for p in &a.reports {
        m.input(p)?;
        bundle.reports.push(read_report(p)?);
    }
    if let Some(p) = &a.comparisons {
        m.input(p)?;
        bundle.comparisons = read_json::<Vec<ComparisonRow>>(p)?;
    }
    if let Some(p) = &a.ratings {
        m.input(p)?;
        let ratings = read_ratings_jsonl(p)?;
        let systems: BTreeSet<&str> = ratings.iter().map(|r| r.system_id_hidden.as_str()).collect();
        for s in systems {
            bundle.likert.push(aggregate_likert(&ratings, s)?);
        }
    }
    let format = match a.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    emit_report(&bundle, format, &a.out)?;
    m.write(&a.out)?;
    Ok(())
}

pub fn rate_serve(a: &RateServeArgs) -> Result<()> {
    let corpus = open_corpus(&a.corpus)?;
    let mut runs = Vec::new();
    for spec in &a.runs {
        let (id, path) = spec.split_once('=').ok_or_else(|| CliError::usage(format!("--run expects SYSTEM_ID=PATH, got {spec:?}")))?;
        let path = Path::new(path);
        runs.push((id.to_string(), read_results_jsonl(path).map_err(io(path))?));
    }
    let pool = Pool::from_runs(&corpus, &runs);
    let per_system: BTreeMap<&str, usize> = runs.iter().map(|(id, r)| (id.as_str(), r.len())).collect();
    log::info!("rating pool: {} items from {per_system:?}", pool.len());
    let svc = Arc::new(RatingService::open(pool, &a.store)?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::internal(e.to_string()))?;
    println!("serving on http://{}", a.addr);
    rt.block_on(plainlang_rating::serve(svc, a.addr, a.static_dir.clone()))
        .map_err(|e| CliError::new(Category::Network, format!("{}: {e}", a.addr)))
}
