use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the analytic and simulation code is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
