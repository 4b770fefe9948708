use thiserror::Error;

use crate::circuit::GateKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate {kind} expects {expected} parameter(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },

    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    Index { index: usize, n_qubits: usize },

    #[error("measurement spec error: {0}")]
    Spec(String),

    #[error("invalid value: {0}")]
    Value(String),

    #[error("gate {0} cannot be decomposed into the basis set")]
    UnsupportedGate(GateKind),

    #[error("lookup table error: {0}")]
    Lut(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("encoding error: {0}")]
    Encode(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Whether the error stems from user configuration rather than a runtime
    /// failure. Used to pick the process exit code.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::Spec(_) | Error::Value(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
