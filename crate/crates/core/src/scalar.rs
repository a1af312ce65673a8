//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the scheduling math is written against.
///
/// Tolerances are attached to the type because what counts as "equal" for a
/// feasibility check depends on the precision available.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    /// Relative slack accepted when comparing times and failure probabilities.
    const FEAS_TOL: Self;
    /// Relative residual targeted by root finders.
    const ROOT_TOL: Self;
    /// Distance under which two breakpoints are treated as the same point.
    const DEDUP_TOL: Self;
    /// Convergence threshold for iterative slack reclamation.
    const STEP_TOL: Self;

    /// Converts an `f64` literal; every value used by this crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const FEAS_TOL: Self = 1e-9;
    const ROOT_TOL: Self = 1e-12;
    const DEDUP_TOL: Self = 1e-12;
    const STEP_TOL: Self = 1e-9;
}

impl Scalar for f32 {
    const FEAS_TOL: Self = 1e-4;
    const ROOT_TOL: Self = 1e-5;
    const DEDUP_TOL: Self = 1e-6;
    const STEP_TOL: Self = 1e-5;
}

/// `a <= b` up to the type's relative feasibility slack, scaled by `max(1, |b|)`.
#[inline]
pub fn le_tol<T: Scalar>(a: T, b: T) -> bool {
    a <= b + T::FEAS_TOL * T::one().max(b.abs())
}

/// Relative difference `|a - b| / max(|a|, |b|, tiny)`.
#[inline]
pub fn rel_diff<T: Scalar>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    (a - b).abs() / scale
}
