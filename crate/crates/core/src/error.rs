use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid construction rejected (too few points, bad extent, wrong dimension).
    InvalidGrid(&'static str),
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// Value count or finiteness violated.
    InvalidValues(&'static str),
    /// Attempt to normalize a field with zero norm.
    Normalization,
    /// A geometric precondition on the domain failed (packet touches boundary, ...).
    Domain(&'static str),
    /// Scalar argument outside its documented range.
    OutOfRange(&'static str),
    /// Corpuscular refraction with sin(theta2) > 1.
    NoTransmission { sin_theta2: f64 },
    /// Wave refraction with sin(theta2) > 1.
    TotalInternalReflection { sin_theta2: f64 },
    /// No node has amplitude above the decomposition threshold.
    AmplitudeBelowThreshold,
    /// Tridiagonal elimination hit a vanishing pivot.
    SolveFailure { row: usize },
    /// No node of an action surface was reached by a real trajectory.
    EmptyReachableSet,
    /// Guidance evaluated where |psi|^2 is below the floor.
    NodeRegion,
    /// Density has a negative value or zero integral.
    NonPositiveDensity,
    /// Upwind transport step with Courant number above the limit.
    CflViolation { courant: f64 },
    /// Slits let through less than the minimum fraction of the beam.
    UnderTransmission { transmitted: f64 },
    /// Too much negative flux through the screen plane.
    BackFlow { fraction: f64 },
    /// Trajectory left the sampled domain.
    LeftDomain,
    /// Invalid parameter combination.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(why) => write!(f, "invalid grid: {why}"),
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::InvalidValues(why) => write!(f, "invalid field values: {why}"),
            Error::Normalization => write!(f, "cannot normalize a field with zero norm"),
            Error::Domain(why) => write!(f, "domain error: {why}"),
            Error::OutOfRange(why) => write!(f, "argument out of range: {why}"),
            Error::NoTransmission { sin_theta2 } => {
                write!(f, "no transmission: sin(theta2) = {sin_theta2}")
            }
            Error::TotalInternalReflection { sin_theta2 } => {
                write!(f, "total internal reflection: sin(theta2) = {sin_theta2}")
            }
            Error::AmplitudeBelowThreshold => write!(f, "amplitude below threshold everywhere"),
            Error::SolveFailure { row } => write!(f, "tridiagonal solve failed at row {row}"),
            Error::EmptyReachableSet => write!(f, "no grid node reachable by a real trajectory"),
            Error::NodeRegion => write!(f, "particle in a near-zero amplitude region"),
            Error::NonPositiveDensity => write!(f, "density must be non-negative with positive mass"),
            Error::CflViolation { courant } => write!(f, "CFL violation: courant number {courant}"),
            Error::UnderTransmission { transmitted } => {
                write!(f, "slits transmit only {transmitted:e} of the beam")
            }
            Error::BackFlow { fraction } => {
                write!(f, "negative screen flux fraction {fraction} exceeds limit")
            }
            Error::LeftDomain => write!(f, "trajectory left the sampled domain"),
            Error::InvalidParameter(why) => write!(f, "invalid parameter: {why}"),
        }
    }
}

impl core::error::Error for Error {}
