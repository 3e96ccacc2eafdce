use thiserror::Error;

/// Library error type.
///
/// Structural problems (wrong dimensions, malformed phases) are kept
/// distinct from domain-constraint violations so that callers (notably the
/// CLI) can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A cache matrix does not have the expected 2 x J shape.
    #[error("dimension mismatch: expected a 2x{expected} cache matrix, got row lengths {got:?}")]
    DimensionMismatch { expected: usize, got: Vec<usize> },

    /// A cache capacity or class capacity constraint is violated.
    #[error("capacity constraint violated: {0}")]
    CapacityViolation(String),

    /// A demand must request two distinct files.
    #[error("demand files must be distinct (both are file {0})")]
    NonDistinctDemand(usize),

    /// The planner only supports the symmetric per-file placements it builds.
    #[error("unsupported placement: {0}")]
    UnsupportedPlacement(String),

    /// Two plans can only be mixed if they serve the same demand.
    #[error("demand mismatch: {{{a_i},{a_j}}} vs {{{b_i},{b_j}}}")]
    DemandMismatch {
        a_i: usize,
        a_j: usize,
        b_i: usize,
        b_j: usize,
    },

    /// A phase payload list does not match the message pattern of its
    /// strategy kind.
    #[error("malformed {kind} phase: {reason}")]
    MalformedPhase { kind: &'static str, reason: String },
}
