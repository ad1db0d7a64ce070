use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature on [{lo}, {hi}] did not converge: estimated error {achieved:e}, requested {requested:e}")]
    QuadratureFailed { achieved: f64, requested: f64, lo: f64, hi: f64 },

    #[error("entry ({i}, {j}): {source}")]
    Entry {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("window {window} too small: truncation bound {bound:e} exceeds tolerance {tol:e}")]
    WindowTooSmall { window: usize, bound: f64, tol: f64 },

    #[error("energy {0} outside the open interval (-1, 1)")]
    EnergyOutOfRange(f64),

    #[error("determinant phase deviates from the positive real axis by {deviation:e}")]
    PhaseCheck { deviation: f64 },

    #[error("light cone violated: horizon {horizon} must be below {bound}")]
    LightCone { horizon: f64, bound: f64 },

    #[error("symbol is not strictly positive (minimum {min:e})")]
    NonPositiveSymbol { min: f64 },

    #[error("{what}: independent evaluations differ by {deviation:e}")]
    CrossCheck { what: String, deviation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
