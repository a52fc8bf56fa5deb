//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All signal-processing code is generic over [`Real`], which is implemented
//! for `f32` and `f64`. Physical constants and small helpers (`sinc`, dB
//! conversions) live here so they are written once for both precisions.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Floor used whenever a magnitude of zero has to be expressed in dB.
pub const DB_FLOOR: f64 = -200.0;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Sum
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn speed_of_light<T: Real>() -> T {
    lit(SPEED_OF_LIGHT)
}

/// Normalized cardinal sine, `sin(pi x) / (pi x)`.
#[inline]
pub fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::one();
    }
    let px = T::PI() * x;
    px.sin() / px
}

/// `exp(j theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `20 log10(ratio)` with a floor of [`DB_FLOOR`] for zero (or negative) input.
#[inline]
pub fn amplitude_db<T: Real>(ratio: T) -> T {
    let floor = lit(DB_FLOOR);
    if ratio <= T::zero() {
        return floor;
    }
    let db = lit::<T>(20.0) * ratio.log10();
    if db < floor {
        floor
    } else {
        db
    }
}

/// Linear power ratio for a value in dB.
#[inline]
pub fn db_to_power<T: Real>(db: T) -> T {
    lit::<T>(10.0).powf(db / lit(10.0))
}

#[inline]
pub fn abs<T: Real>(x: T) -> T {
    Float::abs(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!(sinc(1.0_f64).abs() < 1e-15);
        assert!((sinc(0.5_f64) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((sinc(0.5_f32) - 0.636_619_8).abs() < 1e-6);
    }

    #[test]
    fn db_floor() {
        assert_eq!(amplitude_db(0.0_f64), DB_FLOOR);
        assert_eq!(amplitude_db(1e-30_f64), DB_FLOOR);
        assert!((amplitude_db(0.5_f64) + 6.020_599_913_279_624).abs() < 1e-12);
        assert!((db_to_power(20.0_f64) - 100.0).abs() < 1e-12);
    }
}
