//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by signal construction, synthesis, fitting, and learning.
#[derive(Debug)]
pub enum Error {
    /// A sample was NaN or infinite.
    NonFiniteSample { index: usize },
    /// A signal must contain at least one sample.
    EmptySignal,
    /// A signal tagged `Real` carried a nonzero imaginary part.
    DomainViolation { index: usize },
    /// Bandwidth fraction outside (0, 1].
    BadBandwidth(f64),
    /// Unsupported nonlinearity or constellation order.
    BadOrder(usize),
    /// Signal length incompatible with the requested operation.
    BadLength { len: usize, reason: &'static str },
    /// Two signals that must agree in length do not.
    LengthMismatch { left: usize, right: usize },
    /// Sample rates of paired signals differ.
    SampleRateMismatch { left: f64, right: f64 },
    /// A signal with zero power cannot be aligned or normalized.
    DegenerateSignal,
    /// Simulation input exceeds the well-conditioned polynomial range.
    SampleOutOfRange { index: usize, magnitude: f64 },
    /// Simulation produced a NaN/Inf sample; the system spec is pathological.
    NonFiniteOutput { index: usize },
    /// The static part of this system kind has no closed form.
    NotSeparable,
    /// Least-squares regression matrix condition number exceeds 1e12.
    IllConditioned { condition_number: f64 },
    /// Not enough samples for the requested fit.
    TooFewSamples { needed: usize, got: usize },
    /// Distortion power is negligible; memory indices are undefined.
    DegenerateDistortion,
    /// A residual is identically zero; the normalized coupling is undefined.
    DegenerateResidual { epsilon_abs: f64 },
    /// Input variance is (numerically) zero.
    DegenerateInput,
    /// Record shorter than the operation requires.
    TooShort { needed: usize, got: usize },
    /// Training loss became NaN/Inf; step size too large.
    DivergedLoss { iteration: usize },
    /// Metric target has zero power.
    DegenerateTarget,
    /// No stored reference grid to demodulate against.
    NoReference,
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// JSON (de)serialization failure.
    Json(serde_json::Error),
    /// Malformed signal file.
    BadFormat(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteSample { index } => {
                write!(f, "non-finite sample at index {index}")
            }
            Error::EmptySignal => write!(f, "signal must contain at least one sample"),
            Error::DomainViolation { index } => {
                write!(f, "real-domain signal has nonzero imaginary part at index {index}")
            }
            Error::BadBandwidth(b) => {
                write!(f, "bandwidth fraction {b} outside (0, 1]")
            }
            Error::BadOrder(k) => write!(f, "unsupported order {k}"),
            Error::BadLength { len, reason } => write!(f, "bad length {len}: {reason}"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::SampleRateMismatch { left, right } => {
                write!(f, "sample rate mismatch: {left} Hz vs {right} Hz")
            }
            Error::DegenerateSignal => write!(f, "signal has zero power"),
            Error::SampleOutOfRange { index, magnitude } => {
                write!(f, "|x[{index}]| = {magnitude} exceeds simulation range")
            }
            Error::NonFiniteOutput { index } => {
                write!(f, "simulation produced non-finite output at index {index}")
            }
            Error::NotSeparable => {
                write!(f, "static part is not separable for this system kind")
            }
            Error::IllConditioned { condition_number } => {
                write!(f, "regression matrix ill-conditioned (cond = {condition_number:.3e})")
            }
            Error::TooFewSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::DegenerateDistortion => {
                write!(f, "distortion power negligible; index undefined")
            }
            Error::DegenerateResidual { epsilon_abs } => {
                write!(f, "residual identically zero (epsilon_abs = {epsilon_abs})")
            }
            Error::DegenerateInput => write!(f, "input variance is zero"),
            Error::TooShort { needed, got } => {
                write!(f, "record too short: need {needed}, got {got}")
            }
            Error::DivergedLoss { iteration } => {
                write!(f, "training loss diverged at iteration {iteration}")
            }
            Error::DegenerateTarget => write!(f, "metric target has zero power"),
            Error::NoReference => write!(f, "no reference grid available"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
            Error::BadFormat(msg) => write!(f, "bad file format: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
