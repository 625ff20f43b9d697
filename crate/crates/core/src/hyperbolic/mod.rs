//! Closed-form geometry of the Poincare ball model of `H^{n+1}`, `n ∈ {1, 2}`.
//!
//! Tangent vectors are expressed in the orthonormal frame described on
//! [`Tangent`]; with that convention the transvection `T_x` has identity
//! differential at the origin, so most formulas reduce to moving the base
//! point to `o`.

mod dome;
mod isometry;
mod point;
mod projection;

use thiserror::Error;

use crate::linalg::{Matrix, Vector};
use crate::Real;

pub use dome::{dome_center, dome_signed_distance, mod_round_annulus, modulus_from_distance, sphere_measure, Dome, RoundAnnulus, RoundBall};
pub use isometry::{random_rotation, MobiusIsometry};
pub use point::{BPoint, HPoint, Tangent};
pub use projection::{conformal_annulus, convex_project, ConformalAnnulus, ProjectionTarget};

pub(crate) use point::unit_angle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point with norm {norm} is not inside the open unit ball")]
    NotInBall { norm: f64 },
    #[error("non-finite coordinates")]
    NonFinite,
    #[error("zero vector has no direction")]
    ZeroDirection,
    #[error("ambient dimension {0} unsupported (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not a rotation")]
    NotARotation,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("angular radius {0} outside (0, pi)")]
    InvalidRadius(f64),
    #[error("scaled radius {0} is not below pi")]
    ScaledRadiusTooLarge(f64),
    #[error("annulus radii must satisfy 0 < inner ({inner}) < outer ({outer}) < pi")]
    InvalidAnnulus { inner: f64, outer: f64 },
    #[error("conformal modulus is only defined here for n = 2 (boundary S^2)")]
    ModulusNeedsSphere2,
}

/// Which power of the Poisson kernel serves as the visual density.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityExponent {
    /// `E = n`: the density of the visual measure, integrates to one.
    #[default]
    Poisson,
    /// `E = n - 1`.
    Printed,
    Custom(f64),
}

impl DensityExponent {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Self::Poisson => n as f64,
            Self::Printed => n as f64 - 1.0,
            Self::Custom(e) => e,
        }
    }
}

/// The transvection `T_a` applied to any point of the closed ball.
pub fn transvect<T: Real>(a: &Vector<T>, x: &Vector<T>) -> Vector<T> {
    let ax = a.dot(x);
    let aa = a.norm_squared();
    let xx = x.norm_squared();
    let num = *a * (T::one() + T::two() * ax + xx) + *x * (T::one() - aa);
    num * (T::one() / (T::one() + T::two() * ax + aa * xx))
}

/// `T_a(theta)` for a unit vector `theta`, with `|a + theta|^2` formed from
/// the difference vector so that nearly antipodal inputs keep their relative
/// precision.
pub fn transvect_boundary<T: Real>(a: &Vector<T>, theta: &Vector<T>) -> Vector<T> {
    let gap = (*a + *theta).norm_squared();
    let s = T::one() - a.norm_squared();
    *theta * (s / gap) + *a * ((gap + s) / gap)
}

/// Euclidean Jacobian of `x -> T_a(x)`.
pub fn transvect_jacobian<T: Real>(a: &Vector<T>, x: &Vector<T>) -> Matrix<T> {
    let dim = a.dim();
    let ax = a.dot(x);
    let aa = a.norm_squared();
    let xx = x.norm_squared();
    let den = T::one() + T::two() * ax + aa * xx;
    let tx = transvect(a, x);
    let d_num = a.outer(&((*a + *x) * T::two())) + Matrix::identity(dim).scale(T::one() - aa);
    let d_den = (*a + *x * aa) * T::two();
    (d_num - tx.outer(&d_den)).scale(T::one() / den)
}

pub fn dist<T: Real>(x: &HPoint<T>, y: &HPoint<T>) -> T {
    let num = (*x.coords() - *y.coords()).norm();
    let den = ((T::one() - x.norm_squared()) * (T::one() - y.norm_squared())).sqrt();
    T::two() * (num / den).asinh()
}

/// Geodesic exponential map in frame coordinates.
pub fn exp_map<T: Real>(x: &HPoint<T>, v: &Tangent<T>) -> HPoint<T> {
    let len = v.norm();
    if len == T::zero() {
        return *x;
    }
    let step = *v.frame() * ((len * T::half()).tanh() / len);
    HPoint::saturating(transvect(x.coords(), &step))
}

/// Point at distance `t` from `x` along the direction of `v`.
pub fn exp_ray<T: Real>(x: &HPoint<T>, v: &Tangent<T>, t: T) -> HPoint<T> {
    match v.frame().normalized() {
        Some(u) => exp_map(x, &Tangent(u * t)),
        None => *x,
    }
}

/// Inverse of [`exp_map`]: the initial velocity of the unit-time geodesic
/// from `x` to `y`.
pub fn log_map<T: Real>(x: &HPoint<T>, y: &HPoint<T>) -> Tangent<T> {
    let z = transvect(&-*x.coords(), y.coords());
    match z.normalized() {
        Some(u) => Tangent(u * dist(x, y)),
        None => Tangent::zero(x.dim()),
    }
}

/// Busemann function normalized at the origin:
/// `log(|y - theta|^2 / (1 - |y|^2))`.
pub fn busemann<T: Real>(y: &HPoint<T>, theta: &BPoint<T>) -> T {
    if y.is_origin() {
        return T::zero();
    }
    let gap = (*theta.as_vector() - *y.coords()).norm_squared();
    gap.ln() - (-y.norm_squared()).ln_1p()
}

/// The unit vector at `y` pointing toward `theta`, i.e. minus the gradient
/// of the Busemann function centered at `theta`.
pub fn direction_to_boundary<T: Real>(y: &HPoint<T>, theta: &BPoint<T>) -> Tangent<T> {
    Tangent(transvect_boundary(&-*y.coords(), theta.as_vector()))
}

/// Hessian of `busemann(·, theta)` at `y`: `I - n n^T` in frame coordinates.
pub fn busemann_hessian<T: Real>(y: &HPoint<T>, theta: &BPoint<T>) -> Matrix<T> {
    let n = *direction_to_boundary(y, theta).frame();
    Matrix::identity(y.dim()) - n.outer(&n)
}

/// The visual angle `d_x(theta, eta)`.
pub fn visual_angle<T: Real>(x: &HPoint<T>, theta: &BPoint<T>, eta: &BPoint<T>) -> T {
    let a = direction_to_boundary(x, theta);
    let b = direction_to_boundary(x, eta);
    unit_angle(a.frame(), b.frame())
}

/// `exp(-E * B_o(x, theta))`, the density of the visual measure at `x`
/// relative to the round measure when `E = n`.
pub fn visual_density<T: Real>(x: &HPoint<T>, theta: &BPoint<T>, exponent: DensityExponent) -> T {
    let n = x.dim() - 1;
    let e = T::lit(exponent.value(n));
    (-e * busemann(x, theta)).exp()
}
