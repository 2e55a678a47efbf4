use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state outside the domain where the requested quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Broken internal invariant. Seeing this is a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver aborted at t = {time:.6e}: {reason}{}", dump_note(.dump))]
    SolverAbort {
        time: f64,
        reason: String,
        dump: Option<PathBuf>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn dump_note(dump: &Option<PathBuf>) -> String {
    match dump {
        Some(p) => format!(" (state dumped to {})", p.display()),
        None => String::new(),
    }
}
