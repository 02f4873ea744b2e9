//! Floating-point scalar abstraction the numerics are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type for probabilities, densities and rates: `f64` for production
/// accuracy, `f32` where a caller trades precision for footprint.
///
/// The two tolerance hooks scale validation thresholds with the precision of
/// the concrete type; the documented contract tolerances (1e-12 mass checks,
/// 1e-15 support threshold) are the `f64` values.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for probability-mass normalization checks.
    fn mass_tol() -> Self;

    /// Probabilities below this threshold are treated as exact zeros
    /// (0·log 0 = 0 convention, support membership).
    fn support_eps() -> Self;

    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }
}

impl Scalar for f64 {
    #[inline]
    fn mass_tol() -> Self {
        1e-12
    }
    #[inline]
    fn support_eps() -> Self {
        1e-15
    }
}

impl Scalar for f32 {
    #[inline]
    fn mass_tol() -> Self {
        1e-5
    }
    #[inline]
    fn support_eps() -> Self {
        1e-7
    }
}
