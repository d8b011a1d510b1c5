use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A `CodecConfig` invariant does not hold; carries the offending field name.
    #[error("invalid config: {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid frame: {0}")]
    Frame(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("y4m: {0}")]
    Y4m(String),

    /// Malformed or inconsistent `.civ` container.
    #[error("container: {0}")]
    Container(String),

    /// Entropy payload could not be produced or consumed.
    #[error("entropy: {0}")]
    Entropy(String),

    /// Frame record does not match what the decoder expects.
    #[error("bitstream: {0}")]
    Bitstream(String),

    #[error("eval: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed compressed data.
    pub fn is_bitstream(&self) -> bool {
        matches!(
            self,
            Error::Container(_) | Error::Entropy(_) | Error::Bitstream(_)
        )
    }
}
