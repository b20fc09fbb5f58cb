//! Floating-point scalar abstraction the numeric core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Scalar type for feature matrices, model state, and evaluation statistics.
///
/// Implemented for `f32` and `f64`. Everything numeric downstream of feature
/// extraction (matrices, classifiers, metrics, the 5x2cv statistics) is
/// generic over this trait; concrete aliases live at the crate root.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    fn real(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to scalar")
    }

    /// Widening conversion used by statistics that accumulate in `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
