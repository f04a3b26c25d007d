use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The signature set S_ℓ is empty, so the bound's max term is undefined.
    #[error("empty signature set for ell = {ell} (L = {length}, n_w = {n_words})")]
    EmptySignatureSet {
        ell: usize,
        length: usize,
        n_words: usize,
    },

    /// Two sentences of different length were compared.
    #[error("sentence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    /// A tiny-universe oracle was asked to enumerate something too large.
    #[error("universe too large: {what} = {size} exceeds cap {cap}")]
    UniverseTooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    /// A requested experiment would not fit in memory.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// Checkpoint or golden file could not be decoded.
    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
