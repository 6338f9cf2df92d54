//! Scalar abstraction shared by every raster and map in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type used for intensities, labels and potentials: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Quantizes a value in `[0, 1]` to an 8-bit level, rounding half up.
pub fn quantize_u8<S: Scalar>(v: S) -> u8 {
    let scaled = v.as_f64() * 255.0;
    let level = (scaled + 0.5).floor();
    level.clamp(0.0, 255.0) as u8
}

pub fn dequantize_u8<S: Scalar>(level: u8) -> S {
    S::lit(f64::from(level) / 255.0)
}
