//! The scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar usable by the grid operators.
///
/// Implemented for `f32` and `f64`. Routines that need tolerances far below
/// single precision (dense linear algebra, structure certificates) work in
/// `f64` and convert at their boundaries.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn c(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    /// Converts a count or index into this scalar type.
    #[inline]
    fn n(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("representable count")
    }

    /// Converts this scalar into `f64`.
    #[inline]
    fn f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite value")
    }
}

impl Real for f32 {}
impl Real for f64 {}
