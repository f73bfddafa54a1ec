//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type the solver can run on: `f32` or `f64`.
///
/// All on-disk formats carry `f64`; values are converted on load and on
/// report serialization.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for non-representable input
    /// (which cannot happen for `f32`/`f64`).
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute comparison tolerance used throughout (1e-9 for `f64`).
    fn tolerance() -> Self;
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half<S: Scalar>() -> S {
        S::lit(1.0) / S::lit(2.0)
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(half::<f64>(), 0.5);
        assert_eq!(half::<f32>(), 0.5f32);
        assert_eq!(f32::lit(0.25).as_f64(), 0.25);
    }
}
