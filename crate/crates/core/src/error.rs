use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("{0} requires the resonant case omega == omega_c")]
    NotResonant(&'static str),

    #[error("{0} requires a small atom (set `g_s` and `m`)")]
    MissingSmallAtom(&'static str),

    #[error("{0} requires a drive (set `eta` and `delta`)")]
    MissingDrive(&'static str),

    #[error("{what} = {value} is outside the supported domain {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error(
        "lattice too small for horizon t = {horizon}: need {required} sites \
         per side beyond the legs, have {available}"
    )]
    LightCone {
        horizon: f64,
        required: usize,
        available: usize,
    },

    #[error("time grid step {step} exceeds the kernel resolution limit {limit}")]
    GridTooCoarse { step: f64, limit: f64 },

    #[error("time grid is not ascending or not uniform: {0}")]
    BadGrid(String),

    #[error("norm drifted by {drift:e} (tolerance {tolerance:e})")]
    NormDrift { drift: f64, tolerance: f64 },

    #[error("root not bracketed on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("{what}: independent routes disagree by {diff:e} (tolerance {tolerance:e})")]
    Disagreement {
        what: &'static str,
        diff: f64,
        tolerance: f64,
    },

    #[error("no bound state found: {0}")]
    NoBoundState(&'static str),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of a numerical tolerance or convergence check, as
    /// opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::BracketFailure { .. }
                | Error::NoConvergence(_)
                | Error::Disagreement { .. }
                | Error::NoBoundState(_)
        )
    }
}
