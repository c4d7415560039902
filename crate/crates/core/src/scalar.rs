//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating point type the simulator and designers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` runs are supported but meet them only loosely.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
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
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type C<T> = Complex<T>;

/// `exp(j·phase)`
#[inline]
pub fn cis<T: Scalar>(phase: T) -> C<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Unit phasor in the direction of `z`; `fallback` when `z` is zero.
#[inline]
pub fn unit_or<T: Scalar>(z: C<T>, fallback: C<T>) -> C<T> {
    let n = z.norm();
    if n > T::zero() {
        z / n
    } else {
        fallback
    }
}

/// Wrap a phase into `[0, 2π)`.
#[inline]
pub fn wrap_phase<T: Scalar>(phase: T) -> T {
    let two_pi = T::TAU();
    let mut p = phase % two_pi;
    if p < T::zero() {
        p += two_pi;
    }
    // `-tiny % 2π + 2π` rounds to exactly 2π
    if p >= two_pi {
        p = T::zero();
    }
    p
}

/// Power in dBm of a linear power given in milliwatts. Zero maps to −∞.
#[inline]
pub fn mw_to_dbm<T: Scalar>(mw: T) -> T {
    if mw <= T::zero() {
        T::neg_infinity()
    } else {
        T::of(10.0) * mw.log10()
    }
}

#[inline]
pub fn dbm_to_mw<T: Scalar>(dbm: T) -> T {
    T::of(10.0).powf(dbm / T::of(10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_phase_range() {
        for &p in &[-7.0_f64, -1e-18, 0.0, 3.0, std::f64::consts::TAU, 13.0] {
            let w = wrap_phase(p);
            assert!((0.0..std::f64::consts::TAU).contains(&w), "{p} -> {w}");
        }
        assert_eq!(wrap_phase(-1e-18_f64), 0.0);
    }

    #[test]
    fn dbm_round_trip() {
        assert!((mw_to_dbm(dbm_to_mw(15.0_f64)) - 15.0).abs() < 1e-12);
        assert_eq!(mw_to_dbm(0.0_f64), f64::NEG_INFINITY);
        assert!((dbm_to_mw(0.0_f32) - 1.0).abs() < 1e-6);
    }
}
