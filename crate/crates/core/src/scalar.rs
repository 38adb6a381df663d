//! Scalar abstraction: the floating-point types the solvers run on.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar for all numerics in this crate: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn cst<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must convert to the scalar type")
}

/// `2` as a scalar; used constantly in the dispersion equations.
#[inline]
pub(crate) fn two<R: Real>() -> R {
    R::one() + R::one()
}
