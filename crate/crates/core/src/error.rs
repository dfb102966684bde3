use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation. `field` names the offending
    /// parameter so callers (the CLI in particular) can report it verbatim.
    #[error("invalid {field}: {message}")]
    InvalidConfig { field: &'static str, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown node id {id} (network has {n} nodes)")]
    UnknownNode { id: usize, n: usize },

    #[error("disconnected: no pair of nodes is joined by a path")]
    Disconnected,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            message: message.into(),
        }
    }
}
