use thiserror::Error;

/// Errors raised by contract checks across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("network specs differ")]
    SpecMismatch,

    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("episode already finished; call reset before stepping")]
    EpisodeFinished,

    #[error("option time {t} outside [0, {d}]")]
    OptionTimeOutOfRange { t: f64, d: f64 },

    #[error("negative duration {0}")]
    NegativeDuration(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported schema version {found:?} (expected {expected:?})")]
    SchemaVersion { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}
