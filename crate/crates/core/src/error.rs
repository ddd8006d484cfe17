use thiserror::Error;

use crate::flow::FlowState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band limit {0}: need L >= 2")]
    InvalidBandLimit(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("radius {r} is outside the background domain r >= {r0}")]
    OutOfDomain { r: f64, r0: f64 },

    #[error("invalid background: {0}")]
    InvalidBackground(String),

    #[error("invalid area {0}: must be positive")]
    InvalidArea(f64),

    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),

    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid step {dr} at r = {r}: {reason}")]
    InvalidStep { r: f64, dr: f64, reason: String },

    /// The solution lost positivity. Positive boundary data always admits a
    /// global positive solution, so this is a discretization fault.
    #[error(
        "flow blow-up at r = {radius}: {detail}; positive boundary data admits a global \
         solution, so this indicates a discretization fault (reduce step_safety or raise L)"
    )]
    BlowUp {
        radius: f64,
        detail: String,
        last_state: Box<FlowState>,
    },

    #[error("insufficient asymptotic regime: {0}")]
    InsufficientAsymptoticRegime(String),

    #[error("{0} unavailable: missing or invalid input")]
    Unavailable(&'static str),

    #[error("invalid surface data: {0}")]
    InvalidSurface(String),

    #[error("configuration mismatch: {0}")]
    ConfigurationMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
