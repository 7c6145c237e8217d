use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the kind of problem so front-ends can map them to
/// exit codes: [`Error::kind`] returns the group.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("observed entry ({row}, {col}) is not finite")]
    NonFiniteObservedEntry { row: usize, col: usize },
    #[error("entry ({row}, {col}) is missing")]
    MissingEntry { row: usize, col: usize },
    #[error("index ({row}, {col}) out of bounds")]
    OutOfBounds { row: usize, col: usize },
    #[error("AR(1) coefficient {0} outside (-1, 1)")]
    PhiOutOfRange(f64),
    #[error("observation probability {0} outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("AR(1) estimator denominator is zero")]
    DegenerateDenominator,
    #[error("node {0} is observed; blankets are defined for missing nodes only")]
    NodeObserved(usize),
    #[error("blanket system for node {node} is singular")]
    SingularBlanketSystem { node: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("missing schedule input: {0}")]
    MissingInput(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("solver did not converge within {iters} iterations")]
    NotConverged { iters: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse grouping of [`Error`] variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or parameters.
    Usage,
    /// Malformed or inconsistent data.
    Data,
    /// A numerical procedure failed.
    Numeric,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            PhiOutOfRange(_) | AlphaOutOfRange(_) | MissingInput(_) | InvalidParameter(_)
            | InvalidDimension(_) | NodeObserved(_) => ErrorKind::Usage,
            DimensionMismatch(_)
            | NonFiniteObservedEntry { .. }
            | MissingEntry { .. }
            | OutOfBounds { .. }
            | InvalidGraph(_)
            | NonFinite(_) => ErrorKind::Data,
            NotPositiveDefinite
            | DegenerateDenominator
            | SingularBlanketSystem { .. }
            | NotConverged { .. } => ErrorKind::Numeric,
            Io(_) => ErrorKind::Io,
        }
    }

    /// Short stable identifier, e.g. `DegenerateDenominator`.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            DimensionMismatch(_) => "DimensionMismatch",
            InvalidDimension(_) => "InvalidDimension",
            NonFiniteObservedEntry { .. } => "NonFiniteObservedEntry",
            MissingEntry { .. } => "MissingEntry",
            OutOfBounds { .. } => "OutOfBounds",
            PhiOutOfRange(_) => "PhiOutOfRange",
            AlphaOutOfRange(_) => "AlphaOutOfRange",
            NotPositiveDefinite => "NotPositiveDefinite",
            DegenerateDenominator => "DegenerateDenominator",
            NodeObserved(_) => "NodeObserved",
            SingularBlanketSystem { .. } => "SingularBlanketSystem",
            InvalidGraph(_) => "InvalidGraph",
            MissingInput(_) => "MissingInput",
            InvalidParameter(_) => "InvalidParameter",
            NonFinite(_) => "NonFinite",
            NotConverged { .. } => "MaxIterExceeded",
            Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
