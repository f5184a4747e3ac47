//! Scalar abstractions shared by the real and complex linear algebra.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Real floating point type the models are evaluated in.
///
/// Implemented for `f32` and `f64`. Everything in the crate is generic over
/// it; the crate root exposes `f64` aliases for the common case.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only for unrepresentable values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest condition number accepted from a factorization before the
    /// result is considered meaningless for this precision.
    fn condition_limit() -> Self {
        let precision_bound = (Self::epsilon() * Self::lit(100.0)).recip();
        precision_bound.min(Self::lit(1e12))
    }
}

macro_rules! impl_real {
    ($($t:ty),*) => {
        $(impl Real for $t {})*
    };
}

impl_real!(f32, f64);

/// Field element usable in the dense LU factorization: a [`Real`] or a
/// complex number over one.
pub trait Scalar: Copy + PartialEq + Debug + Num + NumAssign + Neg<Output = Self> + Send + Sync + 'static {
    type Real: Real;

    /// Absolute value (modulus for complex numbers).
    fn modulus(self) -> Self::Real;

    fn from_real(r: Self::Real) -> Self;

    fn finite(self) -> bool;
}

impl<T: Real> Scalar for T {
    type Real = T;

    fn modulus(self) -> T {
        self.abs()
    }

    fn from_real(r: T) -> T {
        r
    }

    fn finite(self) -> bool {
        Float::is_finite(self)
    }
}

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    fn modulus(self) -> T {
        self.norm()
    }

    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }

    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}
