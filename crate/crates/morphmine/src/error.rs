use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input")]
    EmptyInput,

    #[error("prefix not found in trie: {0:?}")]
    UnknownPrefix(String),

    #[error("word not found in trie: {0:?}")]
    UnknownWord(String),

    #[error("interval ({start},{end}) out of bounds for word of length {len}")]
    IntervalOutOfBounds { start: usize, end: usize, len: usize },

    #[error("interval spans the full word (length {len})")]
    FullSpanInterval { len: usize },

    #[error("cannot score a word with an empty morpheme bag: {0:?}")]
    EmptyBag(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty gold standard")]
    EmptyGold,

    #[error("need at least 2 scoreable pairs, got {0}")]
    TooFewPairs(usize),

    #[error("empty analogy set")]
    EmptyAnalogies,

    #[error("embedding dimension mismatch: file has {file}, expected {expected}")]
    DimensionMismatch { file: usize, expected: usize },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),
}

pub type Result<T> = std::result::Result<T, MorphError>;
