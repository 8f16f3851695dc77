use thiserror::Error;

/// Errors raised by the algebraic, geometric and enumeration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("discriminant {0} is a perfect square or not positive")]
    SquareDiscriminant(String),
    #[error("invalid partial quotient {0}")]
    InvalidDigit(String),
    #[error("transform has determinant {0}, expected 1")]
    NotProper(String),
    #[error("form has zero leading coefficient")]
    LeadingZero,
    #[error("wrong sign: {0}")]
    WrongSign(String),
    #[error("bad discriminant {0}")]
    BadDiscriminant(String),
    #[error("form {0} is not primitive")]
    Imprimitive(String),
    #[error("matrix {0} is not hyperbolic")]
    NotHyperbolic(String),
    #[error("matrix {0} has lower-left entry 0; fixed point at infinity")]
    ParabolicAxis(String),
    #[error("trajectory passes within tolerance of {point} after {letters} letters; perturb the start by {perturbation:e}")]
    DegenerateHit {
        point: String,
        letters: usize,
        perturbation: f64,
    },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("bad bound: {0}")]
    BadBound(String),
    #[error("bad length: {0}")]
    BadLength(String),
    #[error("linear functional is identically zero")]
    ZeroFunctional,
    #[error("squarefree kernel {0} is not squarefree")]
    BadKernel(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI error records and by the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SquareDiscriminant(_) => "square_discriminant",
            Error::InvalidDigit(_) => "invalid_digit",
            Error::NotProper(_) => "not_proper",
            Error::LeadingZero => "leading_zero",
            Error::WrongSign(_) => "wrong_sign",
            Error::BadDiscriminant(_) => "bad_discriminant",
            Error::Imprimitive(_) => "imprimitive",
            Error::NotHyperbolic(_) => "not_hyperbolic",
            Error::ParabolicAxis(_) => "parabolic_axis",
            Error::DegenerateHit { .. } => "degenerate_hit",
            Error::BadGrid(_) => "bad_grid",
            Error::BadBound(_) => "bad_bound",
            Error::BadLength(_) => "bad_length",
            Error::ZeroFunctional => "zero_functional",
            Error::BadKernel(_) => "bad_kernel",
            Error::Overflow(_) => "overflow",
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
