use thiserror::Error;

/// A single violated invariant found while validating inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{field} must be positive, got {value}")]
    NonPositiveWidth { field: &'static str, value: f64 },
    #[error("thermal diffusivity must be positive, got {0}")]
    NonPositiveDiffusivity(f64),
    #[error("cooling coefficient {field} must be non-negative, got {value}")]
    NegativeCooling { field: &'static str, value: f64 },
    #[error("source center z = {z} lies outside the slab [0, {w}]")]
    CenterOutsideSlab { z: f64, w: f64 },
    #[error("switch times out of order: t_on = {t_on}, t_off = {t_off}")]
    SwitchOrderViolation { t_on: f64, t_off: f64 },
    #[error("power law of degree {0} is not supported (maximum 4)")]
    UnsupportedPower(usize),
    #[error("{0} is missing for this source variant")]
    MissingField(&'static str),
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("ambient temperature is fixed at 0, got {0}")]
    NonZeroAmbient(f64),
    #[error("request point z = {z} lies outside the slab [0, {w}]")]
    PointOutsideSlab { z: f64, w: f64 },
    #[error("request time {0} is negative")]
    NegativeTime(f64),
}

impl ValidationError {
    /// Stable machine-readable name used in JSON error records.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::NonPositiveWidth { .. } => "NonPositiveWidth",
            ValidationError::NonPositiveDiffusivity(_) => "NonPositiveDiffusivity",
            ValidationError::NegativeCooling { .. } => "NegativeCooling",
            ValidationError::CenterOutsideSlab { .. } => "CenterOutsideSlab",
            ValidationError::SwitchOrderViolation { .. } => "SwitchOrderViolation",
            ValidationError::UnsupportedPower(_) => "UnsupportedPower",
            ValidationError::MissingField(_) => "MissingField",
            ValidationError::NonFinite { .. } => "NonFinite",
            ValidationError::NonZeroAmbient(_) => "NonZeroAmbient",
            ValidationError::PointOutsideSlab { .. } => "PointOutsideSlab",
            ValidationError::NegativeTime(_) => "NegativeTime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {}", join(.0))]
    Validation(Vec<ValidationError>),
    #[error("no sign change for eigenvalue {n} on [{lo}, {hi}] (g = {g_lo}, {g_hi})")]
    BracketingFailure {
        n: usize,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("h1 = h2 = 0 has a zero eigenvalue; use the insulated limit instead")]
    DegenerateCooling,
    #[error("{what} outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("argument {re}{im:+}i overflows the error function")]
    OverflowDomain { re: f64, im: f64 },
    #[error("power law of degree {0} is not supported (maximum 4)")]
    UnsupportedPower(usize),
    #[error("the analytical static path requires v = 0, got v = {0}")]
    MovingSourceUnsupported(f64),
    #[error("operation requires a {expected} source")]
    WrongSourceVariant { expected: &'static str },
    #[error("truncation {requested} exceeds the {available} computed modes")]
    TruncationExceedsSpectrum { requested: usize, available: usize },
    #[error("explicit step is unstable: stability number {number} > {limit}")]
    StabilityViolation { number: f64, limit: f64 },
    #[error("edge temperature reached {ratio:e} of the peak; enlarge the mesh domain")]
    DomainTooSmall { ratio: f64 },
    #[error("{method} did not converge: {detail}")]
    NonConvergence { method: &'static str, detail: String },
    #[error("imaginary residue {imag:e} exceeds tolerance for value {real:e}")]
    ComplexLeak { real: f64, imag: f64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "Validation",
            Error::BracketingFailure { .. } => "BracketingFailure",
            Error::DegenerateCooling => "DegenerateCooling",
            Error::Domain { .. } => "DomainError",
            Error::OverflowDomain { .. } => "OverflowDomain",
            Error::UnsupportedPower(_) => "UnsupportedPower",
            Error::MovingSourceUnsupported(_) => "MovingSourceUnsupported",
            Error::WrongSourceVariant { .. } => "WrongSourceVariant",
            Error::TruncationExceedsSpectrum { .. } => "TruncationExceedsSpectrum",
            Error::StabilityViolation { .. } => "StabilityViolation",
            Error::DomainTooSmall { .. } => "DomainTooSmall",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::ComplexLeak { .. } => "ComplexLeak",
            Error::InvalidRequest(_) => "InvalidRequest",
        }
    }

    /// True for failures caused by bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::UnsupportedPower(_)
                | Error::WrongSourceVariant { .. }
                | Error::InvalidRequest(_)
                | Error::MovingSourceUnsupported(_)
                | Error::DegenerateCooling
        )
    }
}

impl From<Vec<ValidationError>> for Error {
    fn from(errors: Vec<ValidationError>) -> Self {
        Error::Validation(errors)
    }
}

fn join(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
