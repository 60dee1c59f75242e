//! Floating-point scalar abstraction used by the network core.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type a [`ReluNet`](crate::net::ReluNet) can be stored and
/// evaluated in. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to every Scalar")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    /// Shortest decimal string that parses back to the identical value.
    fn to_round_trip_string(self) -> String {
        format!("{self:?}")
    }

    /// `2^e` exactly.
    fn pow2(e: i32) -> Self {
        Self::from_f64_lossy(2f64.powi(e))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
