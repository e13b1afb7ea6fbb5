use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be a positive even integer >= 2, got {0}")]
    InvalidDimension(i64),

    #[error("operation not available in dimension {n}: {msg}")]
    UnsupportedDimension { n: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("function `{name}` expects {expected} argument(s), got {got} (position {pos})")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        pos: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field is not radial: {0}")]
    NotRadial(String),

    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("insufficient window: {0}")]
    InsufficientWindow(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing capability: {0}")]
    MissingCapability(String),

    #[error("point outside grid box: {0}")]
    OutOfBox(String),

    #[error("evaluation failed at grid node {index}: {source}")]
    AtNode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("schema error at {pointer}: {msg}")]
    Schema { pointer: String, msg: String },

    #[error("cache error: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error stems from malformed user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::DimensionMismatch { .. }
                | Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::Arity { .. }
                | Error::Schema { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
