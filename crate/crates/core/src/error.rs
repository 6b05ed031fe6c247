use std::fmt;

use thiserror::Error;

/// Which half of a parallel corpus an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Source => f.write_str("source"),
            Side::Target => f.write_str("target"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },

    #[error("{side} line {line} is empty")]
    EmptyLine { side: Side, line: usize },

    #[error("line {line}: expected a tab between source and target")]
    MissingTab { line: usize },

    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: &'static str },

    #[error("malformed phrase token {token:?}: {reason}")]
    MalformedPhraseToken { token: String, reason: &'static str },

    #[error("phrase table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },

    #[error("phrase table line {line}: duplicate phrase pair {pair:?}")]
    DuplicatePair { line: usize, pair: String },

    #[error("alignment counts are empty")]
    EmptyCounts,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
