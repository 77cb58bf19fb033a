use std::fmt;
use std::process::ExitCode;

use plainlang::corpus::CorpusError;
use plainlang::evaluation::EvaluationError;
use plainlang::llm_gateway::finetune::FinetuneError;
use plainlang::llm_gateway::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage = 2,
    Input = 3,
    Network = 4,
    Internal = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self { category, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Category::Usage, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(Category::Input, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(Category::Internal, message)
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.category as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::Inconsistent { .. } => Self::internal(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<FinetuneError> for CliError {
    fn from(e: FinetuneError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Auth(_) | BackendError::Provider { .. } => Self::input(e.to_string()),
            _ => Self::new(Category::Network, e.to_string()),
        }
    }
}

impl From<plainlang_rating::ServiceError> for CliError {
    fn from(e: plainlang_rating::ServiceError) -> Self {
        Self::input(e.to_string())
    }
}

pub fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::input(format!("{}: {e}", path.display()))
}

pub type Result<T> = std::result::Result<T, CliError>;
