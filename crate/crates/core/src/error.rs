use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Family parameters violate `|α| ≤ C < 1` or a family-specific range.
    InvalidFamily(String),
    /// An exact average was requested for a family without a finite orbit.
    ExactPlanUnsupported,
    InvalidPlan(String),
    /// A parameter outside its documented domain.
    InvalidParameter(String),
    /// A Verblunsky coefficient with `|α| ≥ 1` where the open disk is required.
    CoefficientOutsideDisk { modulus: f64 },
    /// Truncation boundary value is not on the unit circle.
    NonUnimodularBoundary { modulus: f64 },
    EigenNoConvergence,
    /// The spectral parameter sits on (or next to) an eigenvalue of the truncation.
    ResolventSingular { distance: f64 },
    SiteOutsideWindow { site: i64, lo: i64, hi: i64 },
    /// Evaluation point must lie in the open unit disk.
    OutsideDisk { modulus: f64 },
    /// Cocycle product overflowed between two rescalings.
    Overflow,
    /// Adaptive Schur depth did not certify convergence below the depth limit.
    DepthExceeded { depth: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidFamily(msg) => write!(f, "invalid ergodic family: {msg}"),
            Error::ExactPlanUnsupported => {
                write!(f, "exact periodic averaging requires a constant or periodic family")
            }
            Error::InvalidPlan(msg) => write!(f, "invalid sampling plan: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::CoefficientOutsideDisk { modulus } => {
                write!(f, "coefficient modulus {modulus} is not below 1")
            }
            Error::NonUnimodularBoundary { modulus } => {
                write!(f, "boundary value has modulus {modulus}, expected 1")
            }
            Error::EigenNoConvergence => write!(f, "eigensolver did not converge"),
            Error::ResolventSingular { distance } => {
                write!(f, "spectral parameter within {distance:e} of an eigenvalue")
            }
            Error::SiteOutsideWindow { site, lo, hi } => {
                write!(f, "site {site} outside window [{lo}, {hi}]")
            }
            Error::OutsideDisk { modulus } => {
                write!(f, "point of modulus {modulus} is not in the open unit disk")
            }
            Error::Overflow => write!(f, "cocycle product overflowed despite rescaling"),
            Error::DepthExceeded { depth } => {
                write!(f, "Schur continued fraction not converged at depth {depth}")
            }
        }
    }
}

impl core::error::Error for Error {}
