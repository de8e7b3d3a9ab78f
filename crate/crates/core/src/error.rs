use thiserror::Error;

/// Failures while reading a graph file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: reference to undeclared entity `{key}`")]
    Link { line: usize, key: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(err: std::io::Error) -> Self {
        GraphError::Io(err.to_string())
    }
}

/// Failures while decoding a serialized path index.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexFormatError {
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),
    #[error("index data truncated at byte {0}")]
    Truncated(usize),
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

/// Scoring and search failures that are not data errors.
#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("score factor {factor} is zero but its exponent {exponent} is negative")]
    ZeroFactor { factor: &'static str, exponent: f64 },
    #[error("cannot aggregate an empty member list")]
    EmptyPattern,
    #[error("sampling rate {0} must lie in (0, 1]")]
    InvalidRate(f64),
    #[error("aggregator `{0}` supports exact scoring only; sampling requires `sum`")]
    UnsupportedAggregator(&'static str),
}

/// Errors surfaced by the search engines.
#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("query has no keywords")]
    EmptyQuery,
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Table rendering failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("subtree {index} does not match the pattern: {reason}")]
    Mismatch { index: usize, reason: String },
}
