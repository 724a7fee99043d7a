use thiserror::Error;

/// Failures caused by inputs or files rather than by how the program was
/// invoked.
#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Core(#[from] iet_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("no records to summarize")]
    Empty,
    #[error("claims without an implementing operation: {}", .0.join(", "))]
    UnmappedClaim(Vec<String>),
    #[error("claim `{claim}` is annotated in both {first} and {second}")]
    DuplicateClaim {
        claim: String,
        first: String,
        second: String,
    },
    #[error("unknown claim `{claim}` annotated in {file}")]
    UnknownClaim { claim: String, file: String },
}
