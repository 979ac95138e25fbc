use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bit string of length {len} does not divide into {bits_per_symbol}-bit symbols")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("{what} needs {requested} entries, above the cap of {cap}")]
    SizeCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid block selection: {0}")]
    Selection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
