//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point type the samplers and densities are generic over.
///
/// Implemented for `f32` and `f64`. Random variates are drawn in `f64` and
/// narrowed, so `f32` chains consume the RNG stream identically to `f64` ones.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static {
    /// Natural log of the gamma function for positive arguments.
    fn ln_gamma(self) -> Self;

    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    /// Widening conversion to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }

    #[inline]
    fn neg_infinity() -> Self {
        Self::of(f64::NEG_INFINITY)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Real for f64 {
    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Real for f32 {
    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}
