//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point type the algorithms are generic over.
///
/// Implemented for `f32` and `f64`. Everything that needs complex arithmetic
/// (shifted solves, transfer evaluation) uses `Complex<T>` on top of it.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex counterpart of a [`Scalar`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Scalar>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cx_re<T: Scalar>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cabs<T: Scalar>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}
