//! Error type shared by every module in the crate.

use core::fmt;

use crate::numerics::Cx;

/// Everything that can go wrong while constructing or evaluating a chain.
///
/// Construction functions fail loudly with a precise variant instead of
/// silently perturbing data; verification functions fail only when a map
/// cannot even be evaluated (non-finite values), never when a residual is
/// merely large — large residuals are reported, not raised.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A map evaluation produced NaN or infinity.
    NonFiniteEvaluation,
    /// Two interpolation nodes closer than the 1e-12 resolution floor.
    NodeCollision { a: Cx, b: Cx },
    /// Paired inputs of unequal length.
    LengthMismatch { left: usize, right: usize },
    /// An interpolant needs at least one node.
    EmptyNodes,
    /// More nodes than the hard cap of 64 per interpolant.
    TooManyNodes { count: usize },
    /// A shear direction must be nonzero.
    ZeroDirection,
    /// A shear with `λ·v ≠ 0` is not invertible by negating its scalar
    /// function and is rejected at build time.
    NonOrthogonalShear { residual: f64 },
    /// A point or primitive with the wrong ambient dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Stage-wise solving hit two coincident argument values at this stage.
    StageCollision { stage: usize },
    /// Random separation retries exhausted (coincident coordinates persist).
    GenericityFailure,
    /// Damping rounds exhausted without meeting the deviation target; the
    /// best deviation measured is carried in the error.
    DampingExhausted { measured: f64 },
    /// A point list that must be pairwise distinct is not.
    DuplicatePoints,
    /// A map required to have unit Jacobian determinant does not.
    NotVolumePreserving { residual: f64 },
    /// A 2x2 matrix required to have determinant 1 does not.
    NotUnimodular { residual: f64 },
    /// A point that must satisfy a variety's defining equation does not.
    OffVariety { residual: f64 },
    /// An exponent argument exceeding the double-precision comfort cap.
    OverflowGuard { value: f64 },
    /// Sampling repeatedly landed outside the chart (|a| too small).
    ChartSingularity,
    /// A map on index sets that must be injective is not.
    InjectivityViolation,
    /// A target's first coordinate disagrees with its base point's.
    FirstCoordinateMismatch { index: usize },
    /// A function-valued flow time whose argument is not constant along the
    /// generator's orbits (drift measured after flowing time 0.1).
    KernelViolation { drift: f64 },
    /// The growing-compact schedule swallowed a point that must stay
    /// outside the current box at this stage.
    ScheduleViolation { stage: usize },
    /// An operation received a primitive kind it does not support.
    UnsupportedPrimitive { context: &'static str },
    /// A point on ℂ×ℂ* must have nonzero second coordinate.
    ZeroW,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteEvaluation => write!(f, "map evaluation produced a non-finite value"),
            Error::NodeCollision { a, b } => {
                write!(f, "interpolation nodes collide: {a} vs {b} (closer than 1e-12)")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptyNodes => write!(f, "interpolation needs at least one node"),
            Error::TooManyNodes { count } => {
                write!(f, "{count} nodes exceed the 64-node interpolant cap")
            }
            Error::ZeroDirection => write!(f, "shear direction must be nonzero"),
            Error::NonOrthogonalShear { residual } => {
                write!(f, "shear functional not orthogonal to direction: |λ·v| = {residual:e}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::StageCollision { stage } => {
                write!(f, "coincident argument values at stage {stage}")
            }
            Error::GenericityFailure => {
                write!(f, "random separation retries exhausted; coordinates remain coincident")
            }
            Error::DampingExhausted { measured } => {
                write!(f, "damping rounds exhausted; best deviation {measured:e}")
            }
            Error::DuplicatePoints => write!(f, "points must be pairwise distinct"),
            Error::NotVolumePreserving { residual } => {
                write!(f, "Jacobian determinant deviates from 1 by {residual:e}")
            }
            Error::NotUnimodular { residual } => {
                write!(f, "matrix determinant deviates from 1 by {residual:e}")
            }
            Error::OffVariety { residual } => {
                write!(f, "point misses the defining equation by {residual:e}")
            }
            Error::OverflowGuard { value } => {
                write!(f, "exponent argument {value} exceeds the overflow guard")
            }
            Error::ChartSingularity => {
                write!(f, "sampling repeatedly hit the chart singularity |a| < 1e-6")
            }
            Error::InjectivityViolation => write!(f, "index map must be injective"),
            Error::FirstCoordinateMismatch { index } => {
                write!(f, "target {index} disagrees with its base point in the first coordinate")
            }
            Error::KernelViolation { drift } => {
                write!(f, "flow-time argument drifts along the orbit by {drift:e}")
            }
            Error::ScheduleViolation { stage } => {
                write!(f, "box schedule swallowed an unmatched point at stage {stage}")
            }
            Error::UnsupportedPrimitive { context } => {
                write!(f, "unsupported primitive kind for {context}")
            }
            Error::ZeroW => write!(f, "second factor must be nonzero on ℂ×ℂ*"),
        }
    }
}

impl core::error::Error for Error {}
