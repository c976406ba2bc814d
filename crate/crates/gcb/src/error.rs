use std::fmt;

/// One failed axiom together with the elements that witness it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub kind: String,
    pub witness: Vec<String>,
}

impl Violation {
    pub fn new(kind: &str, witness: &[&str]) -> Self {
        Violation { kind: kind.to_string(), witness: witness.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.witness.join(", "))
    }
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("axiom violation: {}", list(.0))]
    AxiomViolation(Vec<Violation>),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not an inverse semigroup: {0}")]
    NotAnInverseSemigroup(String),
    #[error("weight is not quasi-invariant: {0}")]
    NotQuasiInvariant(String),
    #[error("empty groupoid")]
    EmptyGroupoid,
    #[error("unit set is not invariant: {0}")]
    NotInvariant(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not positive definite at unit {unit} (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { unit: String, eigenvalue: f64 },
    #[error("matrix is not hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("witness rejected: {0}")]
    WitnessRejected(String),
    #[error("validation failed: condition {condition}, witness {witness}")]
    ValidationFailed { condition: String, witness: String },
    #[error("operator is not A-linear at generator {generator} (deviation {deviation:e})")]
    NotALinear { generator: String, deviation: f64 },
    #[error("basis does not span the target space (residual {0:e})")]
    BasisNotSpanning(f64),
    #[error("pipeline mismatch at stage {stage} (deviation {deviation:e})")]
    PipelineMismatch { stage: String, deviation: f64 },
    #[error("absorption identity failed at {element} (deviation {deviation:e})")]
    AbsorptionFailed { element: String, deviation: f64 },
    #[error("embedding is not injective (rank {rank} of {expected})")]
    InjectivityFailed { rank: usize, expected: usize },
    #[error("operator is not in the span (residual {0:e})")]
    NotInSpan(f64),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("intertwining failed at {element} (deviation {deviation:e})")]
    IntertwiningFailed { element: String, deviation: f64 },
    #[error("not wide: condition {condition}, witness {witness}")]
    NotWide { condition: String, witness: String },
    #[error("idempotent spectrum too large: {0} idempotents (cap 16)")]
    SpectrumTooLarge(usize),
    #[error("{what} too large: {size} exceeds cap {cap}")]
    TooLarge { what: String, size: usize, cap: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// The variant name, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AxiomViolation(_) => "AxiomViolation",
            Error::NotAGroup(_) => "NotAGroup",
            Error::NotAnInverseSemigroup(_) => "NotAnInverseSemigroup",
            Error::NotQuasiInvariant(_) => "NotQuasiInvariant",
            Error::EmptyGroupoid => "EmptyGroupoid",
            Error::NotInvariant(_) => "NotInvariant",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::WitnessRejected(_) => "WitnessRejected",
            Error::ValidationFailed { .. } => "ValidationFailed",
            Error::NotALinear { .. } => "NotALinear",
            Error::BasisNotSpanning(_) => "BasisNotSpanning",
            Error::PipelineMismatch { .. } => "PipelineMismatch",
            Error::AbsorptionFailed { .. } => "AbsorptionFailed",
            Error::InjectivityFailed { .. } => "InjectivityFailed",
            Error::NotInSpan(_) => "NotInSpan",
            Error::SupportViolation(_) => "SupportViolation",
            Error::IntertwiningFailed { .. } => "IntertwiningFailed",
            Error::NotWide { .. } => "NotWide",
            Error::SpectrumTooLarge(_) => "SpectrumTooLarge",
            Error::TooLarge { .. } => "TooLarge",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
