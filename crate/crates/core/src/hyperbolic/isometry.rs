use rand::Rng;
use rand_distr::StandardNormal;

use super::point::{check_dim, BPoint, HPoint, Tangent};
use super::{transvect, transvect_boundary, transvect_jacobian, GeometryError};
use crate::linalg::{orthonormalize, Matrix, Vector};
use crate::Real;

/// Orientation-preserving isometry `x -> Q * T_a(x)` of the ball model, where
/// `T_a` is the transvection carrying the origin to `a` and `Q` is a rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusIsometry<T> {
    rotation: Matrix<T>,
    transvection_target: HPoint<T>,
}

impl<T: Real> MobiusIsometry<T> {
    pub fn new(rotation: Matrix<T>, transvection_target: HPoint<T>) -> Result<Self, GeometryError> {
        check_dim(rotation.dim())?;
        if rotation.dim() != transvection_target.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: rotation.dim(),
                found: transvection_target.dim(),
            });
        }
        let defect = (rotation.transpose() * rotation - Matrix::identity(rotation.dim())).max_abs();
        let tol = T::lit(1e3) * T::epsilon();
        if defect > tol || (rotation.determinant() - T::one()).abs() > tol {
            return Err(GeometryError::NotARotation);
        }
        Ok(Self { rotation, transvection_target })
    }

    pub fn identity(dim: usize) -> Self {
        Self { rotation: Matrix::identity(dim), transvection_target: HPoint::origin(dim) }
    }

    /// The transvection along the geodesic through `o` and `target`.
    pub fn transvection(target: HPoint<T>) -> Self {
        Self { rotation: Matrix::identity(target.dim()), transvection_target: target }
    }

    pub fn rotation(rotation: Matrix<T>) -> Result<Self, GeometryError> {
        let dim = rotation.dim();
        Self::new(rotation, HPoint::origin(dim))
    }

    /// Rotation of the plane by `angle` (ambient dimension 2).
    pub fn planar_rotation(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let mut q = Matrix::identity(2);
        q[(0, 0)] = c;
        q[(0, 1)] = -s;
        q[(1, 0)] = s;
        q[(1, 1)] = c;
        Self::identity(2).with_rotation(q)
    }

    /// Rotation about the unit `axis` by `angle` (ambient dimension 3).
    pub fn axis_rotation(axis: &BPoint<T>, angle: T) -> Self {
        let k = axis.as_vector();
        let (s, c) = angle.sin_cos();
        let mut q = Matrix::identity(3).scale(c) + k.outer(k).scale(T::one() - c);
        q[(0, 1)] = q[(0, 1)] - s * k[2];
        q[(0, 2)] = q[(0, 2)] + s * k[1];
        q[(1, 0)] = q[(1, 0)] + s * k[2];
        q[(1, 2)] = q[(1, 2)] - s * k[0];
        q[(2, 0)] = q[(2, 0)] - s * k[1];
        q[(2, 1)] = q[(2, 1)] + s * k[0];
        Self::identity(3).with_rotation(q)
    }

    fn with_rotation(mut self, rotation: Matrix<T>) -> Self {
        self.rotation = rotation;
        self
    }

    /// Random isometry: Haar rotation and a transvection of length uniform
    /// in `[0, max_translation]` in a uniformly random direction.
    pub fn random<R: Rng + ?Sized>(dim: usize, max_translation: T, rng: &mut R) -> Self {
        let target = HPoint::random(dim, max_translation, rng);
        Self { rotation: random_rotation(dim, rng), transvection_target: target }
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    pub fn rotation_matrix(&self) -> &Matrix<T> {
        &self.rotation
    }

    pub fn transvection_target(&self) -> &HPoint<T> {
        &self.transvection_target
    }

    pub fn apply(&self, x: &HPoint<T>) -> HPoint<T> {
        HPoint::saturating(self.apply_vector(x.coords()))
    }

    pub fn apply_boundary(&self, theta: &BPoint<T>) -> BPoint<T> {
        let moved = transvect_boundary(self.transvection_target.coords(), theta.as_vector());
        BPoint::renormalized(self.rotation.mul_vec(&moved))
    }

    /// Action on raw coordinates of the closed ball.
    pub fn apply_vector(&self, v: &Vector<T>) -> Vector<T> {
        self.rotation.mul_vec(&transvect(self.transvection_target.coords(), v))
    }

    /// The image of the origin.
    pub fn image_of_origin(&self) -> HPoint<T> {
        HPoint::saturating(self.rotation.mul_vec(self.transvection_target.coords()))
    }

    pub fn inverse(&self) -> Self {
        let qt = self.rotation.transpose();
        let a = -self.rotation.mul_vec(self.transvection_target.coords());
        Self { rotation: qt, transvection_target: HPoint::saturating(a) }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let dim = self.dim();
        let b = self.apply(&other.image_of_origin());
        let back = -*b.coords();
        let cols: Vec<Vector<T>> = (0..dim)
            .map(|i| {
                let e = Vector::basis(dim, i);
                transvect(&back, &self.apply_vector(&other.apply_vector(&e)))
            })
            .collect();
        let rotation = orthonormalize(&Matrix::from_columns(&cols)).unwrap_or_else(|| Matrix::identity(dim));
        let target = rotation.transpose().mul_vec(b.coords());
        Self { rotation, transvection_target: HPoint::saturating(target) }
    }

    /// Differential at `x` in the orthonormal frames at `x` and `g(x)`.
    pub fn differential(&self, x: &HPoint<T>) -> Matrix<T> {
        let gx = self.apply(x);
        let j = transvect_jacobian(self.transvection_target.coords(), x.coords());
        (self.rotation * j).scale(gx.conformal_factor() / x.conformal_factor())
    }

    pub fn push_tangent(&self, x: &HPoint<T>, v: &Tangent<T>) -> Tangent<T> {
        Tangent(self.differential(x).mul_vec(v.frame()))
    }
}

/// Haar-distributed rotation of `R^dim`.
pub fn random_rotation<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<T> {
    loop {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let g: f64 = rng.sample(StandardNormal);
                m[(i, j)] = T::lit(g);
            }
        }
        if let Some(q) = orthonormalize(&m) {
            return q;
        }
    }
}
