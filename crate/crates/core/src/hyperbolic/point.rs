use rand::Rng;
use rand_distr::StandardNormal;

use super::GeometryError;
use crate::linalg::Vector;
use crate::Real;

/// A point of the Poincare ball model of `H^{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint<T> {
    coords: Vector<T>,
}

/// An ideal point: a unit vector of `S^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BPoint<T> {
    dir: Vector<T>,
}

/// A tangent vector expressed in the orthonormal frame at its base point.
///
/// The frame at `x` is the image of the standard frame at the origin under
/// the transvection carrying `o` to `x`, scaled to unit hyperbolic length.
/// Euclidean components are recovered by dividing by the conformal factor,
/// so the hyperbolic norm of a tangent vector is the Euclidean norm of its
/// frame coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent<T>(pub Vector<T>);

pub(crate) fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(GeometryError::UnsupportedDimension(dim))
    }
}

impl<T: Real> HPoint<T> {
    pub fn new(coords: Vector<T>) -> Result<Self, GeometryError> {
        check_dim(coords.dim())?;
        if !coords.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let r = coords.norm();
        if r >= T::one() - T::boundary_floor() {
            return Err(GeometryError::NotInBall { norm: r.to_f64_lossy() });
        }
        Ok(Self { coords })
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self, GeometryError> {
        check_dim(coords.len())?;
        Self::new(Vector::from_f64(coords))
    }

    /// Wraps computed coordinates, pulling them radially back inside the
    /// floor radius if rounding pushed them out. Used for results of exact
    /// formulas whose true value lies in the ball.
    pub(crate) fn saturating(coords: Vector<T>) -> Self {
        let r = coords.norm();
        let cap = T::one() - T::boundary_floor();
        if r >= cap {
            Self { coords: coords * (cap * (T::one() - T::epsilon()) / r) }
        } else {
            Self { coords }
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: Vector::zeros(dim) }
    }

    /// The point at hyperbolic distance `t` from the origin in direction `dir`.
    pub fn radial(dir: &BPoint<T>, t: T) -> Self {
        Self::saturating(*dir.as_vector() * (t * T::half()).tanh())
    }

    #[inline]
    pub fn coords(&self) -> &Vector<T> {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.coords.norm_squared()
    }

    /// The conformal factor `2 / (1 - |x|^2)`.
    #[inline]
    pub fn conformal_factor(&self) -> T {
        T::two() / (T::one() - self.norm_squared())
    }

    /// Hyperbolic distance from the origin.
    pub fn radius(&self) -> T {
        let r = self.coords.norm();
        T::two() * (r / (T::one() - self.norm_squared()).sqrt()).asinh()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.as_slice().iter().all(|c| *c == T::zero())
    }

    /// Coordinates on the hyperboloid model: `(X0, Xv)` with `X0^2 - |Xv|^2 = 1`.
    pub fn hyperboloid(&self) -> (T, Vector<T>) {
        let s = T::one() - self.norm_squared();
        ((T::one() + self.norm_squared()) / s, self.coords * (T::two() / s))
    }

    /// Inverse of [`HPoint::hyperboloid`].
    pub fn from_hyperboloid(x0: T, xv: &Vector<T>) -> Self {
        Self::saturating(*xv * (T::one() / (T::one() + x0)))
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, max_radius: T, rng: &mut R) -> Self {
        let dir = BPoint::random(dim, rng);
        let t = max_radius * T::lit(rng.random::<f64>());
        Self::radial(&dir, t)
    }

    pub fn cast<U: Real>(&self) -> HPoint<U> {
        HPoint::saturating(self.coords.cast())
    }
}

impl<T: Real> BPoint<T> {
    /// Normalizes `dir` onto the unit sphere.
    pub fn new(dir: Vector<T>) -> Result<Self, GeometryError> {
        check_dim(dir.dim())?;
        if !dir.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let unit = dir.normalized().ok_or(GeometryError::ZeroDirection)?;
        Ok(Self { dir: unit })
    }

    pub fn from_f64(dir: &[f64]) -> Result<Self, GeometryError> {
        check_dim(dir.len())?;
        Self::new(Vector::from_f64(dir))
    }

    /// Trusted constructor for vectors that are unit up to rounding.
    pub(crate) fn renormalized(dir: Vector<T>) -> Self {
        let n = dir.norm();
        Self { dir: dir * (T::one() / n) }
    }

    /// The point `(cos t, sin t)` of `S^1`.
    pub fn from_angle(t: T) -> Self {
        Self { dir: Vector::from_slice(&[t.cos(), t.sin()]) }
    }

    /// Point of `S^2` with polar angle `polar` from `e_3` and azimuth `azimuth`.
    pub fn from_spherical(polar: T, azimuth: T) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self::renormalized(Vector::from_slice(&[sp * ca, sp * sa, cp]))
    }

    /// Uniform random point of `S^{dim-1}`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let mut v = Vector::zeros(dim);
            for i in 0..dim {
                let g: f64 = rng.sample(StandardNormal);
                v[i] = T::lit(g);
            }
            if let Ok(p) = Self::new(v) {
                return p;
            }
        }
    }

    #[inline]
    pub fn as_vector(&self) -> &Vector<T> {
        &self.dir
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dir.dim()
    }

    /// Polar angle on `S^1` in `(-pi, pi]`.
    pub fn angle(&self) -> T {
        self.dir[1].atan2(self.dir[0])
    }

    pub fn antipode(&self) -> Self {
        Self { dir: -self.dir }
    }

    /// Round angular distance, i.e. the visual metric at the origin.
    pub fn angle_to(&self, other: &Self) -> T {
        unit_angle(&self.dir, &other.dir)
    }

    pub fn cast<U: Real>(&self) -> BPoint<U> {
        BPoint::renormalized(self.dir.cast())
    }
}

impl<T: Real> Tangent<T> {
    pub fn zero(dim: usize) -> Self {
        Self(Vector::zeros(dim))
    }

    #[inline]
    pub fn frame(&self) -> &Vector<T> {
        &self.0
    }

    /// Hyperbolic length.
    #[inline]
    pub fn norm(&self) -> T {
        self.0.norm()
    }

    /// Converts a Euclidean velocity `u` at `x` to frame coordinates.
    pub fn from_euclidean(x: &HPoint<T>, u: &Vector<T>) -> Self {
        Self(*u * x.conformal_factor())
    }

    /// Euclidean velocity at `x` represented by this tangent vector.
    pub fn to_euclidean(&self, x: &HPoint<T>) -> Vector<T> {
        self.0 * (T::one() / x.conformal_factor())
    }
}

/// Angle between two unit vectors, accurate near 0 and pi.
pub(crate) fn unit_angle<T: Real>(a: &Vector<T>, b: &Vector<T>) -> T {
    let diff = (*a - *b).norm();
    let sum = (*a + *b).norm();
    T::two() * diff.atan2(sum)
}
