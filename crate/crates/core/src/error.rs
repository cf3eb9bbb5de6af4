use thiserror::Error;

/// Errors raised by the tunneling library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A dimensionless configuration falls outside the window where the
    /// closed-form penetrability applies.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    /// λ² is (numerically) equal to ω² + μ², or λ vanishes with nonzero
    /// diffusion; the stationary offsets are undefined.
    #[error("singular parameters: {0}")]
    SingularParameters(String),

    #[error("ambiguous regime: λ = {lambda} is within tolerance of ν = {nu}")]
    AmbiguousRegime { lambda: f64, nu: f64 },

    #[error("asymptotic spreading Δ = {0} is not positive")]
    NonPositiveDelta(f64),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {0}")]
    NonFiniteState(f64),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("negative density {value} (scale {scale}) at t = {t}")]
    NegativeDensity { value: f64, scale: f64, t: f64 },

    #[error("mass loss {0} exceeds 1%")]
    MassLoss(f64),

    #[error("unknown backend `{0}`")]
    UnknownBackend(String),

    #[error("malformed grid file: {0}")]
    GridFormat(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
