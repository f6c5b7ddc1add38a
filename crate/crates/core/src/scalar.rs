//! Scalar abstraction: every probability, angle, and integral in this crate
//! is generic over a floating-point type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the model math runs on: `f32` or `f64`.
///
/// Tolerances are part of the trait because the invariant checks scale with
/// the precision of the type. The `f64` values are the reference ones; the
/// `f32` values are loosened analogues so the same checks stay meaningful.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Tolerance for state invariants: normalization, hermiticity, unit norms.
    fn state_tol() -> Self;

    /// Absolute tolerance guaranteed for integrals and cap-measure equations.
    fn measure_tol() -> Self;

    /// Tolerance for angles produced by root finding and map inversion.
    fn angle_tol() -> Self;

    /// Convert an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// `1/2`, the most common constant in this crate.
    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    /// `2`.
    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f64 {
    #[inline]
    fn state_tol() -> Self {
        1e-12
    }
    #[inline]
    fn measure_tol() -> Self {
        1e-9
    }
    #[inline]
    fn angle_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    #[inline]
    fn state_tol() -> Self {
        1e-5
    }
    #[inline]
    fn measure_tol() -> Self {
        1e-4
    }
    #[inline]
    fn angle_tol() -> Self {
        1e-5
    }
}

/// Clamp `x` into `[lo, hi]`.
#[inline]
pub fn clamp<T: Real>(x: T, lo: T, hi: T) -> T {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}
