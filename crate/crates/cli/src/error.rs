use std::io;
use std::path::PathBuf;

use causal_harm::causality::QueryError;
use causal_harm::corpus::CorpusError;
use causal_harm::dsl::Diagnostic;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{diagnostic}", path.display())]
    Model { path: PathBuf, diagnostic: Box<Diagnostic> },
    #[error("{what} `{text}`: {diagnostic}")]
    Expression {
        what: &'static str,
        text: String,
        diagnostic: Box<Diagnostic>,
    },
    #[error("invalid default utility `{0}`: expected a rational in [0, 1]")]
    Default(String),
    #[error("malformed report: {0}")]
    Report(#[from] serde_json::Error),
    #[error("invalid filter: {0}")]
    Filter(#[from] glob::PatternError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("no context named `{0}`")]
    UnknownContext(String),
    #[error("no default context; pass --context")]
    NoContext,
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl CliError {
    /// 2 for input that cannot be read or parsed, 3 for well-formed but meaningless queries.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::UnknownContext(_) | CliError::NoContext | CliError::Query(_) => 3,
            _ => 2,
        }
    }
}
