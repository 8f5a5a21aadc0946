use thiserror::Error;

/// Errors raised by the numerical and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuinError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("net profit condition violated: rho = lambda * mean = {rho} must be < 1")]
    NetProfit { rho: f64 },

    #[error("unsupported claim family `{family}`: {reason}")]
    UnsupportedFamily {
        family: &'static str,
        reason: &'static str,
    },

    #[error("numeric failure in {what}: residual {residual:e}")]
    Numeric { what: &'static str, residual: f64 },

    #[error("step cap of {cap} events exceeded in {what}")]
    StepCap { what: &'static str, cap: u64 },

    #[error("psi(u) plug-in mode `mc_plugin` requires a Monte Carlo estimate")]
    MissingPlugin,
}

pub type Result<T> = std::result::Result<T, RuinError>;

pub(crate) fn ensure_nonneg(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(RuinError::Domain(format!("{name} must be >= 0, got {x}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(RuinError::Domain(format!("{name} must be > 0, got {x}")))
    }
}
