use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the whole library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar type.
pub(crate) fn lit<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}

/// Square root with the convention that negative arguments have no value.
///
/// Guarantee margins take maxima over terms of the form `sqrt(e) - sqrt(g)`;
/// a negative radicand means the term is excluded from the maximum entirely.
/// Returning `None` (rather than a NaN or an actual float infinity) keeps the
/// exclusion explicit and the comparisons well defined.
pub(crate) fn checked_sqrt<S: Scalar>(x: S) -> Option<S> {
    if x < S::zero() {
        None
    } else {
        Some(x.sqrt())
    }
}
