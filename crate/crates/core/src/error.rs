use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter(String),
    /// A phase or time argument was NaN or infinite.
    NonFinite,
    /// A coupling matrix row does not share the common row sum.
    RowSumMismatch { row: usize, deviation: f64 },
    /// The right-eigenvector matrix is singular or too ill-conditioned.
    DefectiveMatrix { condition: f64 },
    /// The Hessenberg QR iteration did not converge.
    EigenNoConvergence,
    /// The integration step failed the monotonicity or halving check.
    StepTooLarge { time: f64, oscillator: usize, detail: String },
    /// A trajectory was queried beyond its last grid node.
    OutOfRange { time: f64, end: f64 },
    /// Panel doubling did not reach the requested relative tolerance.
    QuadratureNotConverged { panels: usize },
    /// The two-oscillator synchronization time diverges.
    InfiniteSyncTime,
    /// The mode has `Re[λ(J̃−λ)] ≥ 0` and never decays.
    NonDecayingMode { growth: f64 },
    /// The mean rate `ω + J̃σ` (or its lag-corrected form) is not positive.
    NonPositiveRate { phase: f64, rate: f64 },
    /// Predictions require a single eigenfrequency.
    HeterogeneousOmega,
    /// Too few points in the fit band, or a non-negative fitted slope.
    NoDecay { points: usize, slope: f64 },
    /// The trajectory does not span enough periods for the requested analysis.
    TooShort,
    /// The event-driven simulation exceeded its event cap.
    EventFlood { time: f64, events: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NonFinite => write!(f, "non-finite argument"),
            Error::RowSumMismatch { row, deviation } => {
                write!(f, "row {row} deviates from the common row sum by {deviation:e}")
            }
            Error::DefectiveMatrix { condition } => {
                write!(f, "eigenvector matrix is not invertible (condition estimate {condition:e})")
            }
            Error::EigenNoConvergence => write!(f, "QR iteration did not converge"),
            Error::StepTooLarge { time, oscillator, detail } => {
                write!(f, "step too large at t={time} (oscillator {oscillator}): {detail}")
            }
            Error::OutOfRange { time, end } => {
                write!(f, "time {time} lies beyond the trajectory end {end}")
            }
            Error::QuadratureNotConverged { panels } => {
                write!(f, "quadrature did not converge with {panels} panels")
            }
            Error::InfiniteSyncTime => write!(f, "synchronization time is infinite"),
            Error::NonDecayingMode { growth } => {
                write!(f, "mode does not decay (Re[λ(J̃−λ)] = {growth:e})")
            }
            Error::NonPositiveRate { phase, rate } => {
                write!(f, "mean rate {rate} is not positive at phase {phase}")
            }
            Error::HeterogeneousOmega => {
                write!(f, "linear predictions need a single eigenfrequency")
            }
            Error::NoDecay { points, slope } => {
                write!(f, "no decay detected ({points} points in band, slope {slope})")
            }
            Error::TooShort => write!(f, "trajectory too short for the requested analysis"),
            Error::EventFlood { time, events } => {
                write!(f, "event flood: {events} events by t={time}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidParameter(String::from(msg))
}
