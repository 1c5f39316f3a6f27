//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written once against [`Real`] and instantiated
//! for `f32` and `f64`. Acceptance-level tolerances are only meaningful in
//! `f64`; the `f32` instantiation exists for cheap exploratory sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Structural tolerance: norms, Hermiticity, traces.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Spectral tolerance: eigen-residuals and orthonormality.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_CLIP: f64 = 1e-12;

/// Floating point: f32 or f64
pub trait Real:
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
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real")
    }

    /// `STRUCTURAL_TOL`, widened to what the precision can actually hold.
    fn structural_tol() -> Self {
        Self::lit(STRUCTURAL_TOL).max(Self::epsilon() * Self::lit(1e3))
    }

    /// `SPECTRAL_TOL`, widened to what the precision can actually hold.
    fn spectral_tol() -> Self {
        Self::lit(SPECTRAL_TOL).max(Self::epsilon() * Self::lit(1e4))
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sign` with `sign(0) = 0`, used for every absolute-value subgradient.
pub fn sign0<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cre<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Sum in a fixed pairwise order, independent of how the inputs were produced.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        len if len <= 8 => xs.iter().copied().fold(T::zero(), |a, b| a + b),
        len => {
            let (lo, hi) = xs.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Wrap an angle onto `[0, 2π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let r = x % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // `r + tau` can round up to exactly tau for tiny negative r
    if r >= tau {
        T::zero()
    } else {
        r
    }
}
