//! Floating-point scalar abstraction shared by every field and operator.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type a field can be built on: `f32` or `f64`.
///
/// Tolerances that the solver enforces internally (neutrality, Hermitian
/// symmetry) are expressed per type so that the `f32` build is usable at
/// its own precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Largest admissible |mean(v - w)| for the Poisson solve.
    const NEUTRALITY_TOL: f64;
    /// Relative tolerance for Hermitian-symmetry and round-trip checks.
    const SYMMETRY_TOL: f64;

    /// Converts an `f64` literal. Infallible for finite input on both
    /// supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Raises an `f64` tolerance to what this type can resolve.
    #[inline]
    fn resolvable(tol: f64) -> f64 {
        tol.max(Self::epsilon().as_f64() * 1e3)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NEUTRALITY_TOL: f64 = 1e-10;
    const SYMMETRY_TOL: f64 = 1e-11;
}

impl Scalar for f32 {
    const NEUTRALITY_TOL: f64 = 1e-4;
    const SYMMETRY_TOL: f64 = 1e-4;
}
