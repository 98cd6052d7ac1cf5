use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("slope out of range: |alpha| = {alpha}, |beta| = {beta} (both must be <= 1)")]
    SlopeOutOfRange { alpha: f64, beta: f64 },
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("nodes {first} and {second} coincide modulo {period} (distance {distance:e})")]
    SingularNodes {
        first: usize,
        second: usize,
        period: f64,
        distance: f64,
    },
    #[error("too few nodes: need {needed}, found {found}")]
    TooFewNodes { needed: usize, found: usize },
    #[error("Kadec bound violated: max deviation {max_deviation} >= 1/4 at node {node}")]
    KadecViolation { max_deviation: f64, node: usize },
    #[error("wrong node count: expected {expected}, found {found}")]
    WrongNodeCount { expected: usize, found: usize },
    #[error("twin image needs odd padding, got p = {0}")]
    EvenPadding(usize),
    #[error("shifted support leaves the padded grid")]
    SupportOverflow,
    #[error("negative intensity {value} at node {node}")]
    NegativeIntensity { value: f64, node: usize },
    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),
    #[error("gamma must lie in (0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("scheme fails the strong CT condition at ({j}, {k}): {count} distinct nodes, need {needed}")]
    StrongCtFailure {
        j: i64,
        k: i64,
        count: usize,
        needed: usize,
    },
    #[error("extra direction must be nonzero")]
    ZeroExtraDirection,
    #[error("spectrum inconsistent with the support constraint: residual {residual:e} > {tolerance:e}")]
    InconsistentSpectrum { residual: f64, tolerance: f64 },
    #[error("enumeration budget exceeded: {needed} objects > {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("no non-uniqueness witness: smallest singular value {sigma_min:e}")]
    NoWitness { sigma_min: f64 },
    #[error("malformed file at byte {position}: {reason}")]
    MalformedFile { position: usize, reason: String },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
}

impl Error {
    /// Whether the failure is numerical (singular or inconsistent data)
    /// rather than a validation problem with the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularNodes { .. }
                | Error::InconsistentSpectrum { .. }
                | Error::NoWitness { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
