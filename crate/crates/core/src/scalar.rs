//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All matrix code is written against [`Real`], which bundles nalgebra's
//! `RealField` (so complex decompositions are available for `Complex<T>`)
//! with the num-traits conversions used for literals and reporting.

use nalgebra::{DMatrix, DVector, RealField};
use nalgebra::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex vector.
pub type CVec<T> = DVector<Complex<T>>;
/// Dense real matrix.
pub type RMat<T> = DMatrix<T>;
/// Dense real vector.
pub type RVec<T> = DVector<T>;

/// `re + j·im`.
#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `r·e^{jθ}`.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> Complex<T> {
    Complex::new(r * theta.cos(), r * theta.sin())
}
