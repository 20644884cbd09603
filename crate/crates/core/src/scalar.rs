//! Floating-point abstraction shared by the numerical kernels.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar the numerical core is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + std::fmt::LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts back to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a [`Scalar`].
pub type Cplx<T> = num_complex::Complex<T>;

/// `i^k` for `k` taken mod 4.
pub fn i_pow<T: Scalar>(k: u8) -> Cplx<T> {
    match k & 3 {
        0 => Cplx::new(T::one(), T::zero()),
        1 => Cplx::new(T::zero(), T::one()),
        2 => Cplx::new(-T::one(), T::zero()),
        _ => Cplx::new(T::zero(), -T::one()),
    }
}
