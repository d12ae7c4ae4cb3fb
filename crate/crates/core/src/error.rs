use thiserror::Error;

/// A malformed textual input. `line` is 1-based; 0 means "not line oriented".
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message} (at `{token}`)", line_prefix(*.line))]
pub struct ParseError {
    pub line: usize,
    pub token: String,
    pub message: String,
}

fn line_prefix(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}: ")
    }
}

impl ParseError {
    pub fn new(line: usize, token: &str, message: &str) -> Self {
        ParseError { line, token: token.to_string(), message: message.to_string() }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = line;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid partial isomorphism: {0}")]
    InvalidMap(String),
    #[error("point {0} is outside the support")]
    OutsideSupport(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("not canonical: {0}")]
    NotCanonical(String),
    #[error("map is not in the closure class of the descriptor")]
    NotInClass,
    #[error("not rich: {0}")]
    NotRich(String),
    #[error("richness is undefined for the full descriptor")]
    FullDescriptor,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
