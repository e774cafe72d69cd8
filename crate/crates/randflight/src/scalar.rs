//! Scalar abstraction: the numeric kernel is generic over `Real`, implemented
//! for `f32` and `f64`. Accuracy targets quoted in module docs are f64-scale;
//! in f32 they degrade to a few epsilon.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::distributions::Open01;
use rand::Rng;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lift an f64 literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Uniform draw from the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw from the half-open interval [lo, hi).
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(Open01)
            }

            #[inline]
            fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
                rng.gen_range(lo..hi)
            }
        }
    )*};
}

impl_real!(f32, f64);

/// Neumaier (twofold compensated) accumulator: running sum plus a correction
/// term that captures low-order bits lost to rounding.
#[derive(Clone, Copy, Debug)]
pub struct Compensated<S> {
    sum: S,
    correction: S,
}

impl<S: Real> Compensated<S> {
    pub fn zero() -> Self {
        Compensated {
            sum: S::zero(),
            correction: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: S) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Best available rounding of the accumulated sum.
    #[inline]
    pub fn value(&self) -> S {
        self.sum + self.correction
    }
}

impl<S: Real> Default for Compensated<S> {
    fn default() -> Self {
        Self::zero()
    }
}
