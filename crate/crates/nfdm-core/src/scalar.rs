//! Scalar abstraction: everything numeric is generic over `Scalar`, which is
//! any float type that rustfft can plan for. In practice that means f32 or
//! f64; the crate root exports f64 aliases for the common case.

use num_complex::Complex;

pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + rustfft::FftNum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion from f64 (grid constants, tolerances).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 -> Scalar conversion")
    }

    /// Lossy conversion to f64 for reporting and metrics.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("Scalar -> f64 conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex sample in whatever precision the pipeline runs at.
pub type C<T> = Complex<T>;
