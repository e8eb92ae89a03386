use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Which side of an admissible interval was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Bound {
    Lower,
    Upper,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain {
        what: &'static str,
        value: f64,
    },
    /// A parameter set violates a model invariant.
    InvalidParameter {
        what: &'static str,
        reason: &'static str,
    },
    /// Lasing wavelength requested below threshold.
    BelowThreshold {
        current_ua: f64,
        i_th_ua: f64,
    },
    /// Target outside the reachable wavelength band `[low, high]`.
    OutOfRange {
        bound: Bound,
        target: f64,
        low: f64,
        high: f64,
    },
    /// Not enough usable data for a fit.
    NoFit(&'static str),
    /// An iterative solver did not reach its tolerance.
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    /// A model parameter left its range of validity (e.g. Q(i) <= 0).
    ModelRange {
        what: &'static str,
        value: f64,
    },
    /// Two collections that must have matching lengths do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Devices sitting below threshold at the requested bias.
    DevicesBelowThreshold(alloc::vec::Vec<(usize, usize)>),
    MissingReference,
    Empty(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::InvalidParameter { what, reason } => write!(f, "invalid {what}: {reason}"),
            Error::BelowThreshold { current_ua, i_th_ua } => {
                write!(f, "wavelength undefined below threshold ({current_ua} uA < {i_th_ua} uA)")
            }
            Error::OutOfRange { bound, target, low, high } => {
                write!(f, "target {target} violates the {bound} bound of the reachable band [{low}, {high}]")
            }
            Error::NoFit(why) => write!(f, "no fit: {why}"),
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge after {iterations} iterations")
            }
            Error::ModelRange { what, value } => {
                write!(f, "{what} outside model range: {value}")
            }
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "{what}: expected {expected} entries, found {found}")
            }
            Error::DevicesBelowThreshold(devs) => {
                write!(f, "{} device(s) below threshold:", devs.len())?;
                for (r, c) in devs {
                    write!(f, " ({r},{c})")?;
                }
                Ok(())
            }
            Error::MissingReference => f.write_str("difference conversion requires a reference wavelength"),
            Error::Empty(what) => write!(f, "{what} is empty"),
        }
    }
}

impl core::error::Error for Error {}
