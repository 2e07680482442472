use crate::dyadic::DyadicCube;

/// Errors raised by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cube {cube} is invalid: {reason}")]
    InvalidCube { cube: String, reason: String },

    #[error("dimension mismatch: expected d={expected}, found d={found}")]
    DimensionMismatch { expected: u8, found: u8 },

    #[error("cube {cube} has level {level} deeper than grid depth {depth}")]
    TooDeep {
        cube: DyadicCube,
        level: u32,
        depth: u32,
    },

    #[error("power weight x^{beta} raised to {s} is not integrable near 0 (s*beta = {} <= -1)", s * beta)]
    NonIntegrable { beta: f64, s: f64 },

    #[error("sparseness violated at {cube}: |E_Q|/|Q| = {ratio} < gamma = {gamma}")]
    SparsenessViolation {
        cube: DyadicCube,
        ratio: f64,
        gamma: f64,
    },

    #[error("E-sets of {first} and {second} overlap")]
    OverlappingEsets {
        first: DyadicCube,
        second: DyadicCube,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("empty test family")]
    EmptyTestFamily,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
