use thiserror::Error;

/// Errors raised by index construction, contract checks and the image format.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("key width {0} is outside 1..=64")]
    Width(u32),

    #[error("key {value:#x} does not fit in {width} bits")]
    KeyRange { value: u64, width: u32 },

    #[error("keys must be strictly increasing (violated at position {0})")]
    Unsorted(usize),

    #[error("duplicate key at position {0}")]
    Duplicate(usize),

    #[error("empty key set")]
    Empty,

    #[error("operation needs at least {needed} keys, got {got}")]
    TooFewKeys { needed: usize, got: usize },

    #[error("index was built without the {0} component")]
    Missing(&'static str),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad index image: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
