//! Error types shared across the crate.

use thiserror::Error;

/// Quantity whose near-vanishing makes the time-local generator (or a
/// derived sample) undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularQuantity {
    /// The population gap A(t) - B(t).
    PopulationGap,
    /// The coherence magnitude |C(t)|.
    CoherenceMagnitude,
    /// The trace distance D(t) between an evolving state pair.
    TraceDistance,
}

impl std::fmt::Display for SingularQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::PopulationGap => write!(f, "A - B"),
            Self::CoherenceMagnitude => write!(f, "|C|"),
            Self::TraceDistance => write!(f, "D"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid bath parameters: {0}")]
    InvalidParams(String),

    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// The inverse of F(t) does not exist at this time point, so the
    /// time-local generator is undefined there.
    #[error(
        "time-local generator singular at t = {t}: {quantity} = {magnitude:e} is below tolerance"
    )]
    SingularMap {
        t: f64,
        quantity: SingularQuantity,
        magnitude: f64,
    },

    #[error("map is not completely positive at t = {t}: {detail}")]
    NotCompletelyPositive { t: f64, detail: String },

    /// The state is (numerically) pure, so ln((1-x)/(1+x)) diverges. `limit`
    /// carries the one-sided limit of the entropy production rate: signed
    /// infinity when dx/dt != 0, zero when the Bloch norm is stationary.
    #[error("state is pure at t = {t} (Bloch norm x = {x}); entropy rate diverges")]
    PureState { t: f64, x: f64, limit: f64 },

    #[error("bath size N = {n} exceeds the brute-force dimension cap {cap} (composite dimension 2^(N+1))")]
    DimensionCap { n: u32, cap: u32 },

    #[error("RK4 step control failed at t = {t}: local error {error:e} above tolerance after {halvings} halvings")]
    StepFailure { t: f64, error: f64, halvings: u32 },

    #[error("{percent:.2}% of grid samples are undefined (limit {limit_percent}%)")]
    TooManyUndefined { percent: f64, limit_percent: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
