//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type the estimation code is generic over.
///
/// Implemented for `f32` and `f64`. Accuracy targets quoted in the docs
/// (e.g. `1e-10` for the F distribution) refer to `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only on types that cannot
    /// approximate finite doubles (never for `f32`/`f64`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar type cannot represent f64 literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("scalar type cannot represent count")
    }

    /// Relative norm threshold under which an orthogonalized design column
    /// counts as linearly dependent.
    #[inline]
    fn rank_tolerance() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(10.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
