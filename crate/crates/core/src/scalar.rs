//! Real scalar abstraction: the whole crate is generic over `f32`/`f64`, with
//! `f64` aliases exported at the crate root.

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar underlying all complex matrices.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal (model constants, tolerances).
    fn fl(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Lossy conversion back to `f64` for diagnostics and error payloads.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the crate scalar.
pub type Cx<T> = Complex<T>;

/// Complex literal from `f64` parts.
pub fn cx<T: Scalar>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::fl(re), T::fl(im))
}

/// Default hermiticity tolerance for construction checks.
///
/// 1e-12 at `f64` precision; for coarser scalars the bound degrades to a
/// multiple of the machine epsilon so that symmetrization noise still passes.
pub fn hermiticity_tol<T: Scalar>() -> T {
    T::fl(1e-12).max(T::epsilon() * T::fl(100.0))
}

/// Default trace tolerance for density matrices (|tr - 1| bound).
pub fn trace_tol<T: Scalar>() -> T {
    T::fl(1e-10).max(T::epsilon() * T::fl(100.0))
}

/// Default positivity slack for density matrices (min eigenvalue bound).
pub fn positivity_tol<T: Scalar>() -> T {
    T::fl(1e-10).max(T::epsilon() * T::fl(100.0))
}

/// An `f64`-calibrated tolerance, widened to `eps_factor · ε_T` when the
/// working scalar is coarser than `f64`. At `f64` this returns `tol` itself.
pub fn scaled_tol<T: Scalar>(tol: f64, eps_factor: f64) -> T {
    T::fl(tol).max(T::epsilon() * T::fl(eps_factor))
}
