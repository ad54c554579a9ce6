use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported capability: {0}")]
    UnsupportedCapability(String),

    #[error("iterative routine did not converge: {0}")]
    NonConvergence(String),

    #[error("set {index} has no point in the search region")]
    EmptyCatalogSet { index: usize },

    #[error("method not supported for these sets: {0}")]
    MethodUnsupported(String),

    #[error("base point is not in the set")]
    BaseNotInSet,

    #[error("function value is infinite at the base point")]
    InfiniteValueAtBase,

    #[error("sequence gap {gap} not below {needed} within the k budget")]
    GapTooLarge { gap: f64, needed: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("input set {index} is not a convex catalog set")]
    NonConvexInput { index: usize },

    #[error("feasible set does not meet the ball")]
    InfeasibleBall,

    #[error("unknown example id `{0}`")]
    UnknownExample(String),

    #[error("dimension {0} is not supported by this operation")]
    DimensionUnsupported(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
