use thiserror::Error;

use crate::theory::Plateau;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{name}` = {value} is not a valid probability")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("activation threshold k = {k} must be at least 2 for the threshold formulas")]
    InvalidThreshold { k: u32 },

    #[error("tau = 1 leaves no excitatory vertices; the threshold is undefined")]
    InhibitionOnly,

    #[error("bias is 0/0 for tau = 1 and gamma = 0")]
    DegenerateBias,

    #[error("starting set a0 = {a0} is not above the threshold a_c = {a_c}")]
    Subcritical { a0: f64, a_c: f64 },

    #[error("parameters are outside the regime of the predictor: {0}")]
    OutOfRegime(String),

    #[error("trajectory stalls at {last} below {cut} within {steps} steps")]
    NoEscape { steps: usize, last: f64, cut: f64 },

    #[error("target {target} is not reachable for c in the scanned range")]
    TargetUnreachable { target: f64, plateaus: Vec<Plateau> },

    #[error("tau = {tau} is not above 1/(1+gamma) for gamma = {gamma}; no chaotic regime")]
    WrongRegime { tau: f64, gamma: f64 },

    #[error("eager graph would hold about {estimated:.3e} edges (limit {limit:.3e})")]
    TooLargeForEagerMode { estimated: f64, limit: f64 },

    #[error("malformed realization dump at line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that say the parameters sit outside the regime an
    /// operation is defined for, as opposed to malformed input.
    pub fn is_regime_error(&self) -> bool {
        matches!(
            self,
            Error::Subcritical { .. }
                | Error::OutOfRegime(_)
                | Error::NoEscape { .. }
                | Error::TargetUnreachable { .. }
                | Error::WrongRegime { .. }
        )
    }
}
