use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("too few ticks: need at least {needed}, got {got}")]
    TooFewTicks { needed: usize, got: usize },
    #[error("design matrix is rank deficient ({0})")]
    RankDeficient(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("gamma = 1 exactly: long-lag behaviour is indeterminate")]
    CriticalGamma,
    #[error("series too short: need at least {needed}, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("non-positive variogram value at lag {lag}")]
    NonPositiveVariogram { lag: usize },
    #[error("non-positive autocorrelation at lag {lag}")]
    NonPositiveAcf { lag: usize },
    #[error("optimizer did not converge (best point {best:?}, gradient norm {grad_norm})")]
    OptimizerNoConverge { best: f64, grad_norm: f64 },
    #[error("matrix is not positive definite after jitter {jitter}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("conditioning matrix is singular")]
    SingularConditioning,
    #[error("non-positive forecast {value} for model {model}")]
    NonPositiveForecast { model: String, value: f64 },
    #[error("records are misaligned: {0}")]
    MisalignedRecords(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidSpec(_) | Domain(_) | UnsupportedFamily(_) | CriticalGamma => ErrorClass::Config,
            TooFewTicks { .. }
            | SeriesTooShort { .. }
            | ZeroVariance
            | NonPositiveVariogram { .. }
            | NonPositiveAcf { .. }
            | MisalignedRecords(_)
            | NonPositiveForecast { .. } => ErrorClass::Data,
            RankDeficient(_)
            | OptimizerNoConverge { .. }
            | NotPositiveDefinite { .. }
            | SingularConditioning
            | Numerical(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
