use thiserror::Error;

/// Errors raised by precondition checks across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ball with center {center:?} and radius {radius} is not contained in the domain")]
    BallOutsideDomain { center: Vec<f64>, radius: f64 },
    #[error("balls {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("{op}: expected a scalar field, got {ncomp} components")]
    NotScalar { op: &'static str, ncomp: usize },
    #[error("mollifier radius {eps} is not resolvable on spacing {h} (need eps >= 2h)")]
    Unresolvable { eps: f64, h: f64 },
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("candidate universe has {0} balls, at most {1} allowed")]
    UniverseTooLarge(usize, usize),
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("vorticity is not one-signed")]
    MixedSign,
    #[error("alignment defect {0} is not below 1")]
    AlignmentDefect(f64),
    #[error("coincident vortices {0} and {1} in pairwise-only mode")]
    Coincident(usize, usize),
    #[error("vortex {index} left the bounding box at t = {t}")]
    BlowUp { index: usize, t: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
