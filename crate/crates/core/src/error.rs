use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value that must be finite was NaN or infinite.
    NonFinite { what: &'static str },
    /// Grid parameters violate `n_points >= 16` or `length > 0`.
    InvalidGrid { n_points: usize, length: f64 },
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// Spectral derivative order outside {1, 2, 3}.
    InvalidOrder(u32),
    /// A configuration value is out of range.
    InvalidConfig(String),
    /// A Runge-Kutta stage produced non-finite values.
    IntegrationFailure { time: f64 },
    /// Evaluation too close to the line where the coefficient of U'' vanishes.
    Singularity { elevation: f64, denominator: f64 },
    /// No traveling-wave orbit exists for the requested parameters.
    Nonexistence(String),
    /// Wave segments lie on different levels of the first integral.
    EnergyMismatch { delta: f64 },
    /// A constant field has no axis of symmetry.
    UndefinedAxis,
    /// An operation needs more snapshots than the trajectory holds.
    InsufficientSnapshots { needed: usize, got: usize },
    /// A test function's support leaves the sampled window.
    Support(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::InvalidGrid { n_points, length } => {
                write!(f, "invalid grid: n_points={n_points} (need >= 16), length={length} (need > 0)")
            }
            Error::GridMismatch => f.write_str("fields live on different grids"),
            Error::InvalidOrder(order) => write!(f, "derivative order {order} not in {{1,2,3}}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::IntegrationFailure { time } => {
                write!(f, "integration failure: non-finite stage values at t={time}")
            }
            Error::Singularity { elevation, denominator } => write!(
                f,
                "singular line: D(U)={denominator:e} at U={elevation}"
            ),
            Error::Nonexistence(why) => write!(f, "no traveling wave: {why}"),
            Error::EnergyMismatch { delta } => {
                write!(f, "segments lie on different energy levels: |dE|={delta:e}")
            }
            Error::UndefinedAxis => f.write_str("axis of symmetry undefined for a constant field"),
            Error::InsufficientSnapshots { needed, got } => {
                write!(f, "need at least {needed} snapshots, got {got}")
            }
            Error::Support(msg) => write!(f, "test function support: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
