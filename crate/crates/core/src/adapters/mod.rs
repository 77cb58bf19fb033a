//! The three adaptation strategies: baseline prompting, two-agent refinement
//! and fine-tuned model invocation.
//!
//! Every strategy sends the source sentences as a JSON list and expects a list
//! of the same length back. Unusable replies are answered with a corrective
//! reminder, up to `repair_attempts` times.

pub mod parse;
pub mod prompts;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{SampleId, SampleRef};
use crate::llm_gateway::mock::format_list;
use crate::llm_gateway::{ChatMessage, ChatRequest, Gateway, GatewayError, RetryPolicy};
use parse::{parse_adaptation_list, parse_questions, ParseError};
use prompts::{baseline_prompt, repair_reminder, PromptAsset, PromptId};

/// Most questions forwarded from the critic per round.
pub const MAX_CRITIC_QUESTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Baseline,
    TwoAgents,
    Finetuned,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::TwoAgents => "two_agents",
            Self::Finetuned => "finetuned",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "baseline" => Ok(Self::Baseline),
            "two_agents" => Ok(Self::TwoAgents),
            "finetuned" | "ft" => Ok(Self::Finetuned),
            other => Err(format!("unknown strategy {other:?} (baseline|two-agents|finetuned)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub model: String,
    pub repair_attempts: u32,
    pub rounds: u32,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: u64,
}

impl AdapterConfig {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            repair_attempts: 2,
            rounds: 1,
            temperature: 0.0,
            max_retries: RetryPolicy::default().max_retries,
            timeout_secs: 120,
        }
    }

    fn request(&self, messages: Vec<ChatMessage>) -> ChatRequest {
        let mut r = ChatRequest::new(&self.model, messages);
        r.temperature = self.temperature;
        r.max_retries = self.max_retries;
        r.timeout = Duration::from_secs(self.timeout_secs);
        r
    }
}

/// What a strategy adapts: one sample's source sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationInput {
    pub sample_id: SampleId,
    pub source_sentences: Vec<String>,
}

impl From<SampleRef<'_>> for AdaptationInput {
    fn from(s: SampleRef<'_>) -> Self {
        Self { sample_id: s.id(), source_sentences: s.abstract_sample.source_sentences.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Draft,
    Questions,
    Revision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadStage {
    pub round: u32,
    pub stage: Stage,
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub questions: Vec<String>,
}

/// The discussion between the adapting agent and the student critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentThread {
    pub thread_id: String,
    pub stages: Vec<ThreadStage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AgentThread {
    pub fn stage_sequence(&self) -> Vec<Stage> {
        self.stages.iter().map(|s| s.stage).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationResult {
    pub sample_id: SampleId,
    pub strategy: Strategy,
    pub model: String,
    pub adapted_sentences: Vec<String>,
    pub transcript_ref: String,
    /// Corrective re-asks spent on unusable replies.
    pub retry_count: u32,
    /// Transport retries spent inside the gateway.
    pub transport_retries: u32,
    pub gateway_calls: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thread: Option<AgentThread>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdaptError {
    #[error("sample has no source sentences")]
    EmptyInput,
    #[error("{stage:?} stage: {source}")]
    Gateway { stage: Stage, source: GatewayError },
    #[error("{stage:?} stage: no usable reply after {attempts} attempts ({last})")]
    RepairExhausted { stage: Stage, attempts: u32, last: ParseError },
}

impl AdaptError {
    pub fn gateway_error(&self) -> Option<&GatewayError> {
        match self {
            Self::Gateway { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Default)]
struct CallStats {
    repairs: u32,
    transport_retries: u32,
    calls: u32,
}

/// Ask for a list reply, re-asking with a reminder on unusable output.
/// Returns the parsed list and the full exchange including the final reply.
fn ask_for_list(
    gateway: &Gateway,
    cfg: &AdapterConfig,
    mut messages: Vec<ChatMessage>,
    expected: usize,
    stage: Stage,
    stats: &mut CallStats,
) -> Result<(Vec<String>, Vec<ChatMessage>), AdaptError> {
    let mut attempt = 0;
    loop {
        let reply = gateway.chat(&cfg.request(messages.clone())).map_err(|source| AdaptError::Gateway { stage, source })?;
        stats.calls += 1;
        stats.transport_retries += reply.retry_count;
        messages.push(ChatMessage::assistant(reply.content.clone()));
        match parse_adaptation_list(&reply.content, expected) {
            Ok(list) => return Ok((list, messages)),
            Err(e) if attempt >= cfg.repair_attempts => {
                return Err(AdaptError::RepairExhausted { stage, attempts: attempt + 1, last: e })
            }
            Err(e) => {
                log::debug!("{stage:?}: unusable reply ({e}); re-asking");
                messages.push(ChatMessage::user(repair_reminder(&e.to_string(), expected)));
                attempt += 1;
                stats.repairs += 1;
            }
        }
    }
}

fn check_input(input: &AdaptationInput) -> Result<(), AdaptError> {
    if input.source_sentences.is_empty() {
        Err(AdaptError::EmptyInput)
    } else {
        Ok(())
    }
}

fn baseline_messages(input: &AdaptationInput) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(PromptAsset::get(PromptId::System).text),
        ChatMessage::user(baseline_prompt()),
        ChatMessage::user(format_list(&input.source_sentences)),
    ]
}

fn result(input: &AdaptationInput, strategy: Strategy, cfg: &AdapterConfig, adapted: Vec<String>, stats: CallStats, thread: Option<AgentThread>) -> AdaptationResult {
    AdaptationResult {
        sample_id: input.sample_id.clone(),
        strategy,
        model: cfg.model.clone(),
        adapted_sentences: adapted,
        transcript_ref: format!("{}:{}", strategy.as_str(), input.sample_id),
        retry_count: stats.repairs,
        transport_retries: stats.transport_retries,
        gateway_calls: stats.calls,
        thread,
    }
}

/// System prompt, baseline prompt with guidelines, then the sentence list.
pub fn adapt_baseline(input: &AdaptationInput, cfg: &AdapterConfig, gateway: &Gateway) -> Result<AdaptationResult, AdaptError> {
    check_input(input)?;
    let mut stats = CallStats::default();
    let (adapted, _) = ask_for_list(gateway, cfg, baseline_messages(input), input.source_sentences.len(), Stage::Draft, &mut stats)?;
    Ok(result(input, Strategy::Baseline, cfg, adapted, stats, None))
}

/// System prompt and the sentence list only; meant for a fine-tuned model.
pub fn adapt_finetuned(input: &AdaptationInput, cfg: &AdapterConfig, gateway: &Gateway) -> Result<AdaptationResult, AdaptError> {
    check_input(input)?;
    let mut stats = CallStats::default();
    let messages = vec![
        ChatMessage::system(PromptAsset::get(PromptId::System).text),
        ChatMessage::user(format_list(&input.source_sentences)),
    ];
    let (adapted, _) = ask_for_list(gateway, cfg, messages, input.source_sentences.len(), Stage::Draft, &mut stats)?;
    Ok(result(input, Strategy::Finetuned, cfg, adapted, stats, None))
}

fn critic_message(source: &[String], draft: &[String]) -> String {
    format!(
        "Original sentences:\n{}\n\nPlain language adaptations to review:\n{}\n\nAsk your questions, one per line.",
        format_list(source),
        format_list(draft)
    )
}

fn questions_message(questions: &[String]) -> String {
    if questions.is_empty() {
        return "AI Assistant 2 had no questions. Output the final list of adaptations.".to_string();
    }
    let numbered: Vec<String> = questions.iter().enumerate().map(|(i, q)| format!("{}. {q}", i + 1)).collect();
    format!("Questions from AI Assistant 2:\n{}\n\nOutput the final list of adaptations.", numbered.join("\n"))
}

/// Draft with the baseline flow, then per round: student-persona questions
/// (at most five forwarded) and a revision under the integration prompt.
/// Rounds after the first start from the previous revision.
pub fn adapt_two_agents(input: &AdaptationInput, cfg: &AdapterConfig, gateway: &Gateway) -> Result<AdaptationResult, AdaptError> {
    check_input(input)?;
    let n = input.source_sentences.len();
    let mut stats = CallStats::default();
    let mut thread = AgentThread { thread_id: format!("thread:{}", input.sample_id), stages: Vec::new(), warnings: Vec::new() };

    let (mut current, draft_messages) = ask_for_list(gateway, cfg, baseline_messages(input), n, Stage::Draft, &mut stats)?;
    thread.stages.push(ThreadStage { round: 1, stage: Stage::Draft, messages: draft_messages, questions: Vec::new() });

    for round in 1..=cfg.rounds {
        if round > 1 {
            thread.stages.push(ThreadStage {
                round,
                stage: Stage::Draft,
                messages: vec![ChatMessage::assistant(format_list(&current))],
                questions: Vec::new(),
            });
        }

        let mut critic = vec![
            ChatMessage::system(PromptAsset::get(PromptId::StudentPersona).text),
            ChatMessage::user(critic_message(&input.source_sentences, &current)),
        ];
        let reply = gateway
            .chat(&cfg.request(critic.clone()))
            .map_err(|source| AdaptError::Gateway { stage: Stage::Questions, source })?;
        stats.calls += 1;
        stats.transport_retries += reply.retry_count;
        critic.push(ChatMessage::assistant(reply.content.clone()));
        let mut questions = parse_questions(&reply.content);
        if questions.len() > MAX_CRITIC_QUESTIONS {
            let warning = format!("round {round}: critic asked {} questions; forwarding the first {MAX_CRITIC_QUESTIONS}", questions.len());
            log::warn!("{}: {warning}", input.sample_id);
            thread.warnings.push(warning);
            questions.truncate(MAX_CRITIC_QUESTIONS);
        }
        thread.stages.push(ThreadStage { round, stage: Stage::Questions, messages: critic, questions: questions.clone() });

        let revision = vec![
            ChatMessage::system(PromptAsset::get(PromptId::Integration).text),
            ChatMessage::user(format_list(&input.source_sentences)),
            ChatMessage::assistant(format_list(&current)),
            ChatMessage::user(questions_message(&questions)),
        ];
        let (revised, revision_messages) = ask_for_list(gateway, cfg, revision, n, Stage::Revision, &mut stats)?;
        thread.stages.push(ThreadStage { round, stage: Stage::Revision, messages: revision_messages, questions: Vec::new() });
        current = revised;
    }

    let strategy = Strategy::TwoAgents;
    Ok(result(input, strategy, cfg, current, stats, Some(thread)))
}

pub fn adapt(strategy: Strategy, input: &AdaptationInput, cfg: &AdapterConfig, gateway: &Gateway) -> Result<AdaptationResult, AdaptError> {
    match strategy {
        Strategy::Baseline => adapt_baseline(input, cfg, gateway),
        Strategy::TwoAgents => adapt_two_agents(input, cfg, gateway),
        Strategy::Finetuned => adapt_finetuned(input, cfg, gateway),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationFailure {
    pub sample_id: SampleId,
    pub error: String,
    #[serde(skip)]
    pub network: bool,
}

#[derive(Debug, Default)]
pub struct RunOutput {
    pub results: Vec<AdaptationResult>,
    pub failures: Vec<AdaptationFailure>,
}

/// Adapt every input on up to `gateway.concurrency()` worker threads.
/// Results come back ordered by sample id regardless of completion order.
pub fn run_strategy(strategy: Strategy, inputs: &[AdaptationInput], cfg: &AdapterConfig, gateway: &Gateway) -> RunOutput {
    let next = AtomicUsize::new(0);
    let collected = Mutex::new(RunOutput::default());
    let workers = gateway.concurrency().min(inputs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(input) = inputs.get(i) else { break };
                let outcome = adapt(strategy, input, cfg, gateway);
                let mut out = collected.lock().unwrap();
                match outcome {
                    Ok(r) => out.results.push(r),
                    Err(e) => out.failures.push(AdaptationFailure {
                        sample_id: input.sample_id.clone(),
                        network: e.gateway_error().is_some_and(GatewayError::is_network),
                        error: e.to_string(),
                    }),
                }
            });
        }
    });
    let mut out = collected.into_inner().unwrap();
    out.results.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    out.failures.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    out
}

pub fn write_results_jsonl(results: &[AdaptationResult], path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in results {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_results_jsonl(path: impl AsRef<Path>) -> std::io::Result<Vec<AdaptationResult>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}
