use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonHermitian: symmetry deviation {deviation:e} exceeds tolerance")]
    NonHermitian { deviation: f64 },
    #[error("NotPositive: eigenvalue {eigenvalue:e} below clipping threshold")]
    NotPositive { eigenvalue: f64 },
    #[error("InvalidTrace: trace {trace} is not one")]
    InvalidTrace { trace: f64 },
    #[error("InvalidNorm: squared norm {norm} is not one")]
    InvalidNorm { norm: f64 },
    #[error("NonFinite: matrix contains non-finite entries")]
    NonFinite,
    #[error("DimMismatch: {0}")]
    DimMismatch(String),
    #[error("InvalidAlpha: {alpha} outside {domain}")]
    InvalidAlpha { alpha: f64, domain: &'static str },
    #[error("InvalidOrder: Schatten index {p} outside {domain}")]
    InvalidOrder { p: f64, domain: &'static str },
    #[error("InvalidRank: rank {rank} not in 1..={dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("IncompleteKraus: completeness deviation {deviation:e}")]
    IncompleteKraus { deviation: f64 },
    #[error("InvalidPovm: {0}")]
    InvalidPovm(String),
    #[error("TooFewOutcomes: {outcomes} outcomes for dimension {dim}")]
    TooFewOutcomes { outcomes: usize, dim: usize },
    #[error("SingularNormalizer: smallest eigenvalue {eigenvalue:e}")]
    SingularNormalizer { eigenvalue: f64 },
    #[error("InvalidDistribution: {0}")]
    InvalidDistribution(String),
    #[error("SingletonEnsemble: discrimination needs at least two members")]
    SingletonEnsemble,
    #[error("NonFiniteObjective: objective returned {value}")]
    NonFiniteObjective { value: f64 },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of numerical routines rather than of caller input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonHermitian { .. }
                | Error::IncompleteKraus { .. }
                | Error::SingularNormalizer { .. }
                | Error::NonFiniteObjective { .. }
                | Error::NonFinite
        )
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimMismatch(msg.into())
    }
}
