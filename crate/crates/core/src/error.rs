use thiserror::Error;

/// Errors produced by the simulation and estimation routines.
///
/// Variants split into two families: validation problems with the inputs
/// (reported before any computation) and numerical failures raised while
/// computing. [`Error::is_validation`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("field `{field}` must be strictly positive, got {value}")]
    NonPositive { field: String, value: f64 },

    #[error("field `{field}` is not finite")]
    NonFinite { field: String },

    #[error("unknown unit in field `{0}`")]
    UnknownUnit(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("unknown material preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid input `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("time step too large: beta0*dt = {product:.3e} exceeds {limit}; use dt <= {suggested_dt:.3e}")]
    StepTooLarge {
        product: f64,
        limit: f64,
        suggested_dt: f64,
    },

    #[error("work budget exceeded: estimated {estimate:.3e} site-steps, budget {budget:.3e}")]
    BudgetExceeded { estimate: f64, budget: f64 },

    #[error("ODE integration failed at t = {time}: step size underflow")]
    IntegrationFailure { time: f64 },

    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("envelope has only {found} peaks, need at least {required}")]
    InsufficientPeaks { found: usize, required: usize },

    #[error("growing envelope: fitted slope {slope:.3e} is positive")]
    GrowingEnvelope { slope: f64 },

    #[error("coherence length undefined: profile is zero at the reference separation")]
    UndefinedLength,

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True when the error describes bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::IntegrationFailure { .. }
                | Error::QuadratureNonConvergence { .. }
                | Error::InsufficientPeaks { .. }
                | Error::GrowingEnvelope { .. }
                | Error::UndefinedLength
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(field: &str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite {
            field: field.to_string(),
        });
    }
    if value <= 0.0 {
        return Err(Error::NonPositive {
            field: field.to_string(),
            value,
        });
    }
    Ok(value)
}

pub(crate) fn require_finite(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            field: field.to_string(),
        })
    }
}
