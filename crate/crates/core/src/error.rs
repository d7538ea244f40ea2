use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`])
/// used by the CLI error envelope.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not diagonalizable within conditioning limits (kappa = {kappa:.3e} > {kappa_max:.1e})")]
    NonDiagonalizable { kappa: f64, kappa_max: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("frame matrix is singular (smallest singular value ratio {0:.3e})")]
    SingularFrame(f64),
    #[error("matrix is not Hermitian (relative defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} exceeds the configured cap {1}")]
    DimensionOverflow(usize, usize),
    #[error("argument outside its domain: {0}")]
    DomainError(String),
    #[error("operator is not para-Hermitian: {0}")]
    NotParaHermitian(String),
    #[error("eta is not invertible (smallest singular value ratio {0:.3e})")]
    SingularEta(f64),
    #[error("state vector is zero")]
    ZeroState,
    #[error("spectrum is not real (max |Im lambda| = {0:.3e})")]
    ComplexSpectrum(f64),
    #[error("biorthogonal overlap <psi~, psi> vanishes")]
    DegenerateOverlap,
    #[error("G is not a metric operator for the observable")]
    NotAMetric,
    #[error("two-level Hamiltonian is in the broken regime (gamma^2 <= r^2 sin^2 theta)")]
    BrokenRegime,
    #[error("observable spectrum is degenerate (gap {gap:.3e} below {tol:.3e})")]
    DegenerateSpectrum { gap: f64, tol: f64 },
    #[error("no cycle found within the trajectory horizon {0}")]
    NoCycleFound(f64),
    #[error("gauge closure violated for index {index}: defect {defect:.3e}")]
    BadGauge { index: usize, defect: f64 },
    #[error("starting frame is not in the fiber over the initial decomposition (distance {0:.3e})")]
    NotInFiber(f64),
    #[error("lift does not close over a cycle: {0}")]
    NotCyclic(String),
}

impl Error {
    /// Stable identifier used in machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonDiagonalizable { .. } => "NonDiagonalizable",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::SingularFrame(_) => "SingularFrame",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DimensionOverflow(..) => "DimensionOverflow",
            Error::DomainError(_) => "DomainError",
            Error::NotParaHermitian(_) => "NotParaHermitian",
            Error::SingularEta(_) => "SingularEta",
            Error::ZeroState => "ZeroState",
            Error::ComplexSpectrum(_) => "ComplexSpectrum",
            Error::DegenerateOverlap => "DegenerateOverlap",
            Error::NotAMetric => "NotAMetric",
            Error::BrokenRegime => "BrokenRegime",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::NoCycleFound(_) => "NoCycleFound",
            Error::BadGauge { .. } => "BadGauge",
            Error::NotInFiber(_) => "NotInFiber",
            Error::NotCyclic(_) => "NotCyclic",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
