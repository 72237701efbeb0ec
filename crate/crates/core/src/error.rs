use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the operation (a singular kernel
    /// evaluation, a nonpositive scale, an out-of-range exponent).
    Domain(String),
    /// Inconsistent array shapes or dimensions.
    Dimension(String),
    /// Two particles came closer than the kernel's minimum radius.
    Collision { i: usize, j: usize, distance: f64 },
    /// The capped simplex is empty (`cap * N < 1`).
    Infeasible(String),
    /// A rejection sampler ran out of trials.
    SamplerExhausted { trials: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Dimension(m) => write!(f, "dimension mismatch: {m}"),
            Error::Collision { i, j, distance } => write!(
                f,
                "particles {i} and {j} collided (distance {distance:e} below minimum radius)"
            ),
            Error::Infeasible(m) => write!(f, "infeasible problem: {m}"),
            Error::SamplerExhausted { trials } => {
                write!(f, "rejection sampler exceeded {trials} trials")
            }
        }
    }
}

impl core::error::Error for Error {}
