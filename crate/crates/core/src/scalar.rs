//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, densities and secrecy numerics are written against [`Real`],
//! which is implemented for `f32` and `f64`. Exact decisions (feasibility
//! boundaries, rational gain reduction) go through [`ExactRatio`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Exact rational used where a decision must not depend on rounding.
pub type ExactRatio = BigRational;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + FftNum
    + Display
    + LowerExp
    + Default
    + Debug
    + Send
    + Sync
    + 'static
{
    /// `|det|` at or below this value is treated as rank deficient.
    fn singular_tol() -> Self;
    /// Tolerance on integrality of lattice coordinates.
    fn int_tol() -> Self;
}

impl Real for f64 {
    fn singular_tol() -> Self {
        1e-12
    }
    fn int_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn singular_tol() -> Self {
        1e-6
    }
    fn int_tol() -> Self {
        1e-3
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("finite scalar")
}

/// Exact rational value of a finite float.
pub fn exact<T: Real>(x: T) -> Option<ExactRatio> {
    BigRational::from_float(to_f64(x))
}

pub fn exact_int(k: i64) -> ExactRatio {
    BigRational::from_integer(BigInt::from(k))
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Accumulator<T> {
    pub fn new() -> Self {
        Accumulator {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn stable_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    let mut acc = Accumulator::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = std::iter::once(1.0f64).chain(std::iter::repeat(1e-16).take(10_000));
        let s = stable_sum(xs);
        assert!((s - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn exact_of_half() {
        let h = exact(0.5f64).unwrap();
        assert_eq!(h, BigRational::new(BigInt::from(1), BigInt::from(2)));
    }
}
