use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficient sequence too short: need {needed} sites, have {available}")]
    TooShort { needed: usize, available: usize },

    #[error("Verblunsky coefficient gamma[{index}] = {value} lies outside (-1, 1)")]
    GammaOutOfRange { index: usize, value: f64 },

    #[error("singular divisor at index {index} (|value| = {value:e})")]
    SingularDivisor { index: usize, value: f64 },

    #[error("energy z = {re} + {im}i is too close to the band [-2, 2]")]
    NearBand { re: f64, im: f64 },

    #[error("quasimomentum k = {0} must lie strictly inside (0, pi)")]
    BadQuasimomentum(f64),

    #[error("numerical breakdown at site {site}: {detail}")]
    Breakdown { site: usize, detail: String },

    #[error("sign changes persist up to the horizon (last change at site {last_change}, horizon {horizon})")]
    Inconclusive { last_change: usize, horizon: usize },

    #[error("series does not converge within the horizon (Cauchy difference {cauchy:e})")]
    NotConvergent { cauchy: f64 },

    #[error("solution vanishes near x = {x} (bound state present)")]
    ZeroCrossing { x: f64 },

    #[error("step size too coarse: Richardson error {estimate:e} per unit length exceeds {limit:e}")]
    StepSize { estimate: f64, limit: f64 },

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
