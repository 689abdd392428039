use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval: a = {a} must be strictly less than b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid node count {0}: at least two nodes are required")]
    InvalidCount(usize),

    #[error("nodes must be finite and strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },

    #[error("nodes {index} and {} are too close to be distinguished", index + 1)]
    DuplicateNode { index: usize },

    #[error("node set is not equispaced")]
    NotEquispaced,

    #[error("singular system: pivot {pivot:e} below threshold {threshold:e}")]
    SingularSystem { pivot: f64, threshold: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (last update norm {update_norm:e})")]
    NewtonDivergence { iterations: usize, update_norm: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("block {index}: {source}")]
    Block { index: usize, source: Box<Error> },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("reporting time {t} is not a trajectory node")]
    MissingNode { t: f64 },

    #[error("problem has no exact solution")]
    MissingExact,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear part disagrees with rhs at t = {t} (difference {difference:e})")]
    InconsistentLinearPart { t: f64, difference: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short machine-friendly label for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid-interval",
            Error::InvalidCount(_) => "invalid-count",
            Error::NotIncreasing { .. } => "not-increasing",
            Error::DuplicateNode { .. } => "duplicate-node",
            Error::NotEquispaced => "not-equispaced",
            Error::SingularSystem { .. } => "singular-system",
            Error::NewtonDivergence { .. } => "newton-divergence",
            Error::NonFiniteState { .. } => "non-finite-state",
            Error::Block { source, .. } => source.kind(),
            Error::UnknownProblem(_) => "unknown-problem",
            Error::MissingNode { .. } => "missing-node",
            Error::MissingExact => "missing-exact",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InconsistentLinearPart { .. } => "inconsistent-linear-part",
            Error::InvalidConfig(_) => "invalid-config",
        }
    }

    pub(crate) fn in_block(self, index: usize) -> Error {
        Error::Block {
            index,
            source: Box::new(self),
        }
    }
}
