use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("malformed material data in {path}: {reason}")]
    MaterialData { path: PathBuf, reason: String },

    #[error("malformed mode profile data: {0}")]
    ProfileData(String),

    /// Denominator of the scattering matrix vanished.
    #[error("singular scattering denominator |D| = {magnitude:e} (d_omega={d_omega:e}, d_Omega={d_big_omega:e}, kappa={kappa:e}, Gamma={gamma:e}, |G|^2={coupling_sq:e})")]
    SingularDenominator {
        magnitude: f64,
        d_omega: f64,
        d_big_omega: f64,
        kappa: f64,
        gamma: f64,
        coupling_sq: f64,
    },

    /// Stokes channel pumped at or beyond the parametric-oscillation threshold.
    #[error("parametric oscillation: |g0|^2 Np = {coupling_sq:e} reaches the threshold kappa*Gamma = {threshold:e}")]
    ParametricOscillation { coupling_sq: f64, threshold: f64 },

    #[error("time step {dt:e} s exceeds the resolution limit {limit:e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite state at t = {time:e} s")]
    NonFinite { time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDenominator { .. }
                | Error::ParametricOscillation { .. }
                | Error::StepTooLarge { .. }
                | Error::NonFinite { .. }
        )
    }
}

/// Rejects non-finite values and values not strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
    }
    Ok(value)
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")));
    }
    Ok(value)
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("must be finite, got {value}")));
    }
    Ok(value)
}
