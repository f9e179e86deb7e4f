//! Error type shared by all operations.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum HeckeError {
    /// Two elements (or an element and a pair) live in different group backends.
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    /// A coset enumeration exceeded the pair's cap. This means the index is
    /// either genuinely infinite or larger than the configured bound; it is a
    /// recoverable condition, never a hang.
    #[error("coset enumeration exceeded the cap of {cap} cosets")]
    IndexOverflow { cap: usize },

    /// Two Hecke elements belong to different pairs.
    #[error("elements belong to different Hecke pairs")]
    PairMismatch,

    /// Operation requires a finite group backend.
    #[error("operation requires a finite group backend")]
    NotFinite,

    /// Operation requires an abelian group.
    #[error("operation requires an abelian group")]
    NotAbelian,

    /// A pair spec failed validation; the message names the offending field.
    #[error("invalid pair spec: {0}")]
    SpecInvalid(String),

    /// A character parameter is outside the formula's domain.
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    /// The intersection subgroup has no computable generating set on this
    /// backend, so index computations over it cannot start.
    #[error("no generating set available for the intersection subgroup on this backend")]
    MissingGenerators,

    /// Malformed element, Hecke element, or window JSON.
    #[error("parse error: {0}")]
    Parse(String),
}

impl HeckeError {
    /// Process exit code used by the CLI: 3 for overflow, 2 for any other
    /// domain error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HeckeError::IndexOverflow { .. } => 3,
            _ => 2,
        }
    }

    /// Stable machine-readable code for JSON error output.
    pub fn code(&self) -> &'static str {
        match self {
            HeckeError::BackendMismatch(_) => "backend_mismatch",
            HeckeError::IndexOverflow { .. } => "index_overflow",
            HeckeError::PairMismatch => "pair_mismatch",
            HeckeError::NotFinite => "not_finite",
            HeckeError::NotAbelian => "not_abelian",
            HeckeError::SpecInvalid(_) => "spec_invalid",
            HeckeError::DegenerateParameter(_) => "degenerate_parameter",
            HeckeError::MissingGenerators => "missing_generators",
            HeckeError::Parse(_) => "parse_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, HeckeError>;
