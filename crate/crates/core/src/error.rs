use thiserror::Error;

/// Errors produced by the library.
///
/// Vertex ids carried in error values are 1-based, matching the text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("pattern syntax error at column {pos}: {msg}")]
    PatternSyntax { pos: usize, msg: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("profile has length {got}, game has {expected} vertices")]
    ProfileLength { expected: usize, got: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("vertex {vertex} has non-decreasing pattern {pattern}")]
    NotDecreasing { vertex: usize, pattern: String },

    #[error("gadget error: {0}")]
    Gadget(String),

    #[error("assignment rejected: {0}")]
    Assignment(String),

    #[error("profile is not a pure Nash equilibrium (violators: {violators:?})")]
    NotPne { violators: Vec<usize> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
