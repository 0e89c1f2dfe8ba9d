//! Scalar abstraction for sample values.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point sample type: `f32` or `f64`.
///
/// Everything numeric in this crate (signals, filter kernels, entropies,
/// statistics) is generic over this trait so the same code runs in single
/// or double precision. Pattern counting itself is integer-exact and does
/// not depend on the scalar type.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}
