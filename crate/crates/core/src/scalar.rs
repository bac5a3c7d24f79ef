use std::fmt::LowerExp;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate: polynomial coefficients, moment
/// forms and the interior-point solver are all generic over it.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + LowerExp {
    /// Lossy conversion from `f64`, used for solver constants.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("scalar conversion from f64")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
