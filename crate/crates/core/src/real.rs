//! Scalar abstraction shared by the analytic layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the closed-form model is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion of an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `expm1(-d * l) / d`, continuous through `d = 0` where it equals `-l`.
    #[inline]
    fn expm1_ratio(d: Self, l: Self) -> Self {
        if d.abs() * l.abs() < Self::lit(1e-300) || d == Self::zero() {
            -l
        } else {
            (-d * l).exp_m1() / d
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn half<T: Real>() -> T {
    T::lit(0.5)
}
