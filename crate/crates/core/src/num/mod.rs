//! Scalar-generic numeric kernels: compensated summation, Gauss–Kronrod
//! quadrature and bracketed root finding.

pub mod quad;
pub mod roots;

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the numeric core is generic over.
///
/// `f32` and `f64` satisfy this out of the box; a wider soft-float type
/// implementing the `num-traits` hierarchy can be dropped in behind the
/// same interface.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    ///
    /// Panics only if the target type cannot represent finite `f64` values
    /// at all, which no supported scalar does.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Kahan–Babuška compensated accumulator.
///
/// Keeps the running error of long oscillatory sums at a few ulps
/// independent of length.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T: Real> {
    sum: T,
    comp: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

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

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        // Sum 1e8 copies of 0.1 plus a large value; naive summation loses
        // the tail, compensated summation keeps it.
        let mut k = KahanSum::<f64>::new();
        k.add(1e16);
        for _ in 0..1000 {
            k.add(0.1);
        }
        k.add(-1e16);
        assert!((k.value() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn real_of_roundtrips_for_f64() {
        assert_eq!(<f64 as Real>::of(0.5), 0.5);
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
    }
}
