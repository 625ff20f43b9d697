//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar the geometry is generic over (`f32` or `f64`).
///
/// The associated constants carry the precision-dependent thresholds: the
/// floor on `1 - |x|^2` for ball points, the tolerance on the total mass of a
/// probability measure, and the default stopping tolerance of the Newton
/// solvers.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Ball points must satisfy `|x| < 1 - BOUNDARY_FLOOR`.
    const BOUNDARY_FLOOR: f64;
    /// Accepted deviation of the total mass of a probability measure from 1.
    const MASS_TOLERANCE: f64;
    /// Default gradient-norm tolerance for barycenter and Karcher solves.
    const SOLVER_TOLERANCE: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn boundary_floor() -> Self {
        Self::lit(Self::BOUNDARY_FLOOR)
    }

    #[inline]
    fn solver_tolerance() -> Self {
        Self::lit(Self::SOLVER_TOLERANCE)
    }
}

impl Real for f64 {
    const BOUNDARY_FLOOR: f64 = 1e-12;
    const MASS_TOLERANCE: f64 = 1e-12;
    const SOLVER_TOLERANCE: f64 = 1e-9;
}

impl Real for f32 {
    const BOUNDARY_FLOOR: f64 = 1e-5;
    const MASS_TOLERANCE: f64 = 1e-5;
    const SOLVER_TOLERANCE: f64 = 2e-5;
}
