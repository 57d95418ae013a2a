//! Crate-wide error type. Variants carry the quantity that tripped the check
//! so callers (and the CLI error records) can report it without re-deriving.

use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Jet or matrix dimensions do not match the operation.
    DimensionMismatch { expected: usize, got: usize },
    /// A jet constructor or accessor was handed an invalid piece of data.
    InvalidJet(String),
    /// Linear part too close to singular to invert. Carries the smallest
    /// singular value that was measured.
    SingularLinearPart { sigma_min: f64 },
    /// A matrix inversion / linear solve hit a pivot below threshold.
    SingularMatrix { pivot: f64 },
    /// Spectrum data violated an invariant (ordering, signs, epsilon gate...).
    InvalidSpectrum(String),
    /// The margin constant came out non-positive; epsilon is too coarse for
    /// the spectrum.
    NonPositiveMargin { zeta: f64 },
    /// Cocycle data inconsistent (period, fiber dimensions...).
    InvalidCocycle(String),
    /// Monodromy has an eigenvalue of modulus >= 1.
    NonContracting { modulus: f64 },
    /// Eigenvalue-modulus clusters could not be separated at the grouping
    /// tolerance.
    ClusterSeparation { gap: f64 },
    /// Requested reduction accuracy is not achievable; carries the best
    /// epsilon the reduction could certify.
    EpsilonNotAchievable { requested: f64, achievable: f64 },
    /// Homological data is not homogeneous of the expected degree.
    NotHomogeneous { expected: usize },
    /// A map expected to be in resonant normal form has coefficients outside
    /// the resonant support.
    NotResonant { component: usize },
    /// Renormalization hypothesis failure: tangency order too low or the
    /// contraction gap M^(q+1) < m violated.
    RenormalizationHypothesis(String),
    /// An iterative scheme ran out of its iteration budget.
    NoConvergence { iterations: usize, residual: f64 },
    /// Endomorphism data invalid (degree, dimension, common zeros...).
    InvalidEndomorphism(String),
    /// The requested operation passed through or too close to the critical set.
    CriticalOrbit { value: f64 },
    /// A verified radius shrank below the collapse floor.
    RadiusCollapse { floor: f64 },
    /// Root finding could not certify the full root set.
    IncompleteRoots { found: usize, expected: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidJet(msg) => write!(f, "invalid jet: {msg}"),
            Error::SingularLinearPart { sigma_min } => {
                write!(f, "linear part numerically singular (sigma_min = {sigma_min:.3e})")
            }
            Error::SingularMatrix { pivot } => {
                write!(f, "matrix numerically singular (pivot = {pivot:.3e})")
            }
            Error::InvalidSpectrum(msg) => write!(f, "invalid spectrum: {msg}"),
            Error::NonPositiveMargin { zeta } => {
                write!(f, "margin constant not positive (zeta = {zeta:.6})")
            }
            Error::InvalidCocycle(msg) => write!(f, "invalid cocycle: {msg}"),
            Error::NonContracting { modulus } => {
                write!(f, "monodromy not contracting (eigenvalue modulus {modulus:.6})")
            }
            Error::ClusterSeparation { gap } => {
                write!(f, "eigenvalue modulus clusters too close to separate (gap {gap:.3e})")
            }
            Error::EpsilonNotAchievable { requested, achievable } => write!(
                f,
                "requested epsilon {requested:.3e} not achievable (best {achievable:.3e})"
            ),
            Error::NotHomogeneous { expected } => {
                write!(f, "jet not homogeneous of degree {expected}")
            }
            Error::NotResonant { component } => {
                write!(f, "non-resonant coefficient in component {component}")
            }
            Error::RenormalizationHypothesis(msg) => {
                write!(f, "renormalization hypothesis failed: {msg}")
            }
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::InvalidEndomorphism(msg) => write!(f, "invalid endomorphism: {msg}"),
            Error::CriticalOrbit { value } => {
                write!(f, "orbit too close to the critical set (|C_f| = {value:.3e})")
            }
            Error::RadiusCollapse { floor } => {
                write!(f, "verified radius collapsed below {floor:.3e}")
            }
            Error::IncompleteRoots { found, expected } => {
                write!(f, "root set incomplete: found {found} of {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
