use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed diagram, braid, state or network text. `pos` is a byte offset.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid braid word: {0}")]
    InvalidBraid(String),

    #[error("unknown component {0}")]
    UnknownComponent(usize),

    #[error("unknown crossing {0}")]
    UnknownCrossing(usize),

    #[error("cannot delete the last remaining component")]
    LastComponent,

    #[error("move rejected: {0}")]
    MoveRejected(String),

    #[error("{what} {value} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("state is not normalized: {0}")]
    Unnormalized(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("singular matrix")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contraction budget exceeded: {0}")]
    Budget(String),

    #[error("unsupported network shape: {0}")]
    Shape(String),

    #[error("unknown edge {0}")]
    UnknownEdge(usize),

    #[error("unknown free end {0}")]
    UnknownFreeEnd(usize),

    #[error("crossing tensor rejected: {0}")]
    CrossingTensor(String),

    #[error("input braid is not Brunnian")]
    NotBrunnian,

    #[error("template output failed Brunnian verification: {0}")]
    TemplateVerification(String),

    #[error("invalid influence: {0}")]
    InvalidInfluence(String),

    #[error("arity mismatch: {0}")]
    Arity(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    /// True for errors caused by a configured size limit rather than bad input.
    pub fn is_cap_overflow(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::Budget(_))
    }
}
