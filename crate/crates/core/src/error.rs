use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("invalid mode set: {0}")]
    InvalidModeSet(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("coefficients are not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NonHermitianOperator { defect: f64 },
    #[error("mode {mode} is gapless or below the chemical potential: omega - mu = {gap}")]
    Gapless { mode: usize, gap: f64 },
    #[error("state truncated too hard: norm deficit {deficit:.3e}")]
    TruncationDominated { deficit: f64 },
    #[error("degree cut {requested} exceeds what the truncation supports ({limit})")]
    DegreeTooLarge { requested: usize, limit: usize },
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),
    #[error("integrator failed to reach tolerance {tol:.1e} (achieved {achieved:.3e})")]
    StepSizeFailure { tol: f64, achieved: f64 },
    #[error("switching window too small: profile is {value:.3e} at the boundary")]
    WindowTooSmall { value: f64 },
    #[error("perturbative order {order} exceeds the supported bound {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("diagram enumeration bound exceeded: {0}")]
    EnumerationBound(String),
    #[error("spectral leakage {leakage:.3e} above threshold {threshold:.1e}")]
    SpectralLeakage { leakage: f64, threshold: f64 },
    #[error("no pole found in [{lo}, {hi}]")]
    NoPole { lo: f64, hi: f64 },
    #[error("unitarity defect {defect:.3e} above tolerance")]
    NotUnitary { defect: f64 },
    #[error("operator word is not {expected}")]
    Ordering { expected: &'static str },
    #[error("missing table entry: {0}")]
    MissingEntry(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
