use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Scalar stored in a register. Circuits whose gates and initial state are
/// real never leave the reals, so they run on `f64`; everything else runs on
/// `Complex64`.
pub trait Amplitude:
    Copy
    + Default
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    const IS_COMPLEX: bool;

    fn from_real(x: f64) -> Self;

    fn to_complex(self) -> Complex64;

    /// Multiplication by a complex factor. Real registers only ever see
    /// factors with zero imaginary part.
    fn mul_complex(self, c: Complex64) -> Self;

    fn norm_sqr(self) -> f64;

    /// `Re(conj(self) * other)`.
    fn re_inner(self, other: Self) -> f64;

    /// Views a slice as interleaved `f64` storage: returns the buffer and the
    /// number of `f64` slots per amplitude (1 or 2, real part first).
    fn as_f64_slice(data: &[Self]) -> (&[f64], usize);
}

impl Amplitude for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    #[inline]
    fn mul_complex(self, c: Complex64) -> Self {
        debug_assert!(c.im == 0.0, "complex factor applied to a real register");
        self * c.re
    }

    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }

    #[inline]
    fn re_inner(self, other: Self) -> f64 {
        self * other
    }

    fn as_f64_slice(data: &[Self]) -> (&[f64], usize) {
        (data, 1)
    }
}

impl Amplitude for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }

    #[inline]
    fn mul_complex(self, c: Complex64) -> Self {
        self * c
    }

    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }

    #[inline]
    fn re_inner(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }

    fn as_f64_slice(data: &[Self]) -> (&[f64], usize) {
        // SAFETY: Complex<f64> is #[repr(C)] { re: f64, im: f64 }, so a slice of
        // n complex values is 2n contiguous, properly aligned f64 values.
        let flat = unsafe { std::slice::from_raw_parts(data.as_ptr().cast::<f64>(), data.len() * 2) };
        (flat, 2)
    }
}
