//! Test catalog of boundary maps `S^n -> S^n`: rational power maps and
//! windings of `S^2`, chart stretches, boundary traces of isometries, and
//! quasisymmetric coverings of `S^1`.

mod derivative;
mod parse;
mod qs;

use std::sync::Arc;

use thiserror::Error;

use crate::hyperbolic::{BPoint, GeometryError, MobiusIsometry};
use crate::linalg::{Matrix, Vector};
use crate::Real;

pub use derivative::{estimate_degree, estimate_distortion, sample_derivative, DistortionEstimate};
pub use parse::parse_map_spec;
pub use qs::{Lift, QsCovering};

/// Angular exclusion radius around catalog-singular points.
pub const BRANCH_GUARD: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("stretch exponent {0} must be positive")]
    NonPositiveStretch(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lift is not strictly increasing at knot ({x}, {y})")]
    NonMonotone { x: f64, y: f64 },
    #[error("map acts on S^{found}, expected S^{expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{kind} maps are only available for n = {required}")]
    WrongSphere { kind: &'static str, required: usize },
    #[error("derivative step {0} outside [1e-7, 1e-3]")]
    StepOutOfRange(f64),
    #[error("point {point:?} lies within the singular guard of the map")]
    NearSingular { point: Vec<f64> },
    #[error("too few samples: {0} (need at least 100)")]
    TooFewSamples(usize),
    #[error("degree estimate {estimate} is {residual} away from an integer")]
    DegreeResidual { estimate: f64, residual: f64 },
    #[error("cannot parse map spec `{spec}`: bad token `{token}`")]
    Parse { spec: String, token: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Power,
    MobiusBoundary,
    RadialStretch,
    Winding,
    QsCircle,
    Composition,
}

#[derive(Clone, Debug)]
enum Repr<T> {
    Power { degree: u32 },
    Mobius(MobiusIsometry<T>),
    /// `to_chart` rotates the pivot to the chart origin (`e_3` on `S^2`,
    /// `e_1` on `S^1`).
    Stretch { alpha: T, pivot: BPoint<T>, to_chart: Matrix<T> },
    Winding { degree: u32 },
    Qs(QsCovering),
    Compose(Arc<SphereMap<T>>, Arc<SphereMap<T>>),
}

/// A boundary map from the catalog with its nominal degree and distortion.
#[derive(Clone, Debug)]
pub struct SphereMap<T> {
    repr: Repr<T>,
    n: usize,
    nominal_degree: u32,
    nominal_distortion: f64,
    label: String,
}

fn check_n(n: usize) -> Result<(), MapError> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(MapError::InvalidParameter(format!("sphere dimension {n} must be 1 or 2")))
    }
}

impl<T: Real> SphereMap<T> {
    /// `z -> z^d` on `S^1`, or the rational map `z -> z^d` of the Riemann
    /// sphere with `0` at `e_3`.
    pub fn power(n: usize, degree: u32) -> Result<Self, MapError> {
        check_n(n)?;
        if degree == 0 {
            return Err(MapError::ZeroDegree);
        }
        Ok(Self {
            repr: Repr::Power { degree },
            n,
            nominal_degree: degree,
            nominal_distortion: 1.0,
            label: format!("power:{degree}"),
        })
    }

    pub fn identity(n: usize) -> Result<Self, MapError> {
        let mut f = Self::power(n, 1)?;
        f.label = "identity".into();
        Ok(f)
    }

    /// Boundary trace of an isometry.
    pub fn mobius(g: MobiusIsometry<T>) -> Self {
        let a = g.transvection_target().coords().to_f64_vec();
        Self {
            n: g.dim() - 1,
            repr: Repr::Mobius(g),
            nominal_degree: 1,
            nominal_distortion: 1.0,
            label: format!("mobius:{}", a.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")),
        }
    }

    /// `z -> z |z|^{alpha - 1}` in the stereographic chart sending `pivot` to
    /// `0` and its antipode to infinity.
    pub fn radial_stretch(alpha: T, pivot: BPoint<T>) -> Result<Self, MapError> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(MapError::NonPositiveStretch(alpha.to_f64_lossy()));
        }
        let n = pivot.dim() - 1;
        let frame = crate::sphere::tangent_frame(&pivot);
        let to_chart = match n {
            1 => Matrix::from_columns(&[*pivot.as_vector(), frame[0]]).transpose(),
            _ => Matrix::from_columns(&[frame[0], frame[1], *pivot.as_vector()]).transpose(),
        };
        let a = alpha.to_f64_lossy();
        let k = if n == 2 { a.max(1.0 / a) } else { 1.0 };
        Ok(Self {
            repr: Repr::Stretch { alpha, pivot, to_chart },
            n,
            nominal_degree: 1,
            nominal_distortion: k,
            label: format!("stretch:{a}@{:?}", pivot.as_vector().to_f64_vec()),
        })
    }

    /// `(polar, azimuth) -> (polar, d * azimuth)` on `S^2`.
    pub fn winding(degree: u32) -> Result<Self, MapError> {
        if degree == 0 {
            return Err(MapError::ZeroDegree);
        }
        Ok(Self {
            repr: Repr::Winding { degree },
            n: 2,
            nominal_degree: degree,
            nominal_distortion: degree as f64,
            label: format!("winding:{degree}"),
        })
    }

    pub fn qs_covering(covering: QsCovering) -> Self {
        Self {
            n: 1,
            nominal_degree: covering.degree,
            nominal_distortion: 1.0,
            label: format!("qs:{:?};deg={}", covering.homeo, covering.degree),
            repr: Repr::Qs(covering),
        }
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: Self, inner: Self) -> Result<Self, MapError> {
        if outer.n != inner.n {
            return Err(MapError::DimensionMismatch { expected: outer.n, found: inner.n });
        }
        Ok(Self {
            n: outer.n,
            nominal_degree: outer.nominal_degree * inner.nominal_degree,
            nominal_distortion: outer.nominal_distortion * inner.nominal_distortion,
            label: format!("compose:{}|{}", outer.label, inner.label),
            repr: Repr::Compose(Arc::new(outer), Arc::new(inner)),
        })
    }

    /// Replaces the display label, e.g. with the spec string it was parsed from.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nominal_degree(&self) -> u32 {
        self.nominal_degree
    }

    pub fn nominal_distortion(&self) -> f64 {
        self.nominal_distortion
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> MapKind {
        match &self.repr {
            Repr::Power { .. } => MapKind::Power,
            Repr::Mobius(_) => MapKind::MobiusBoundary,
            Repr::Stretch { .. } => MapKind::RadialStretch,
            Repr::Winding { .. } => MapKind::Winding,
            Repr::Qs(_) => MapKind::QsCircle,
            Repr::Compose(..) => MapKind::Composition,
        }
    }

    /// The isometry whose trace this map is, when it is one.
    pub fn as_isometry(&self) -> Option<MobiusIsometry<T>> {
        match &self.repr {
            Repr::Mobius(g) => Some(*g),
            Repr::Power { degree: 1 } => Some(MobiusIsometry::identity(self.n + 1)),
            Repr::Compose(a, b) => Some(a.as_isometry()?.compose(&b.as_isometry()?)),
            _ => None,
        }
    }

    pub fn apply(&self, theta: &BPoint<T>) -> BPoint<T> {
        debug_assert_eq!(theta.dim(), self.n + 1);
        match &self.repr {
            Repr::Power { degree } => match self.n {
                1 => BPoint::from_angle(theta.angle() * T::lit(*degree as f64)),
                _ => power_s2(theta, *degree),
            },
            Repr::Mobius(g) => g.apply_boundary(theta),
            Repr::Stretch { alpha, to_chart, .. } => {
                let local = to_chart.mul_vec(theta.as_vector());
                let moved = match self.n {
                    1 => stretch_s1(&local, *alpha),
                    _ => stretch_s2(&local, *alpha),
                };
                BPoint::renormalized(to_chart.transpose().mul_vec(&moved))
            }
            Repr::Winding { degree } => {
                let v = theta.as_vector();
                let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
                let psi = v[1].atan2(v[0]) * T::lit(*degree as f64);
                BPoint::renormalized(Vector::from_slice(&[rho * psi.cos(), rho * psi.sin(), v[2]]))
            }
            Repr::Qs(c) => BPoint::from_angle(c.eval(theta.angle())),
            Repr::Compose(outer, inner) => outer.apply(&inner.apply(theta)),
        }
    }

    /// Whether `theta` lies within `guard` of a point where the map fails to
    /// be a local diffeomorphism (branch points, chart poles, kinks).
    pub fn near_singular(&self, theta: &BPoint<T>, guard: T) -> bool {
        let near = |p: &Vector<T>| theta.angle_to(&BPoint::renormalized(*p)) < guard;
        match &self.repr {
            Repr::Power { degree } => {
                self.n == 2 && *degree > 1 && theta.as_vector()[2].abs() > guard.cos()
            }
            Repr::Mobius(_) => false,
            Repr::Stretch { alpha, pivot, .. } => {
                *alpha != T::one() && (near(pivot.as_vector()) || near(&-*pivot.as_vector()))
            }
            Repr::Winding { degree } => *degree > 1 && theta.as_vector()[2].abs() > guard.cos(),
            Repr::Qs(c) => c.homeo.singular_angles().iter().any(|&a| {
                let p = Vector::from_slice(&[T::lit(a.cos()), T::lit(a.sin())]);
                near(&p)
            }),
            Repr::Compose(outer, inner) => {
                inner.near_singular(theta, guard) || outer.near_singular(&inner.apply(theta), guard)
            }
        }
    }
}

/// `z -> z^d` in the chart `z = tan(polar / 2) e^{i azimuth}`.
fn power_s2<T: Real>(theta: &BPoint<T>, degree: u32) -> BPoint<T> {
    let v = theta.as_vector();
    let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if rho == T::zero() {
        return *theta;
    }
    let d = T::lit(degree as f64);
    // Half-angle tangent, or its reciprocal on the southern hemisphere.
    let (cos_p, sin_p) = if v[2] >= T::zero() {
        let t = (rho / (T::one() + v[2])).powf(d);
        let tt = t * t;
        ((T::one() - tt) / (T::one() + tt), T::two() * t / (T::one() + tt))
    } else {
        let s = (rho / (T::one() - v[2])).powf(d);
        let ss = s * s;
        ((ss - T::one()) / (ss + T::one()), T::two() * s / (ss + T::one()))
    };
    let psi = v[1].atan2(v[0]) * d;
    BPoint::renormalized(Vector::from_slice(&[sin_p * psi.cos(), sin_p * psi.sin(), cos_p]))
}

/// Stretch about `e_3` on `S^2`.
fn stretch_s2<T: Real>(v: &Vector<T>, alpha: T) -> Vector<T> {
    let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if rho == T::zero() {
        return *v;
    }
    let polar = rho.atan2(v[2]);
    let new_polar = T::two() * ((polar * T::half()).tan().powf(alpha)).atan();
    let (s, c) = new_polar.sin_cos();
    Vector::from_slice(&[v[0] / rho * s, v[1] / rho * s, c])
}

/// Stretch about `e_1` on `S^1`.
fn stretch_s1<T: Real>(v: &Vector<T>, alpha: T) -> Vector<T> {
    let a = v[1].atan2(v[0]);
    let t = (a.abs() * T::half()).tan().powf(alpha);
    let new_a = T::two() * t.atan() * a.signum();
    Vector::from_slice(&[new_a.cos(), new_a.sin()])
}

/// Named boundary points used by map specs.
pub fn named_point<T: Real>(name: &str, n: usize) -> Option<BPoint<T>> {
    let v: &[f64] = match (name, n) {
        ("north", 2) => &[0.0, 0.0, 1.0],
        ("south", 2) => &[0.0, 0.0, -1.0],
        ("east", 2) => &[1.0, 0.0, 0.0],
        ("north", 1) => &[0.0, 1.0],
        ("south", 1) => &[0.0, -1.0],
        ("east", 1) => &[1.0, 0.0],
        ("west", 1) => &[-1.0, 0.0],
        _ => return None,
    };
    BPoint::from_f64(v).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degree_one_power_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2] {
            let f = SphereMap::<f64>::power(n, 1).unwrap();
            for _ in 0..100 {
                let p = BPoint::random(n + 1, &mut rng);
                assert!((*f.apply(&p).as_vector() - *p.as_vector()).max_abs() < 1e-14);
            }
        }
        assert!(SphereMap::<f64>::power(1, 0).is_err());
    }

    #[test]
    fn doubling_on_circle_has_two_preimages() {
        let f = SphereMap::<f64>::power(1, 2).unwrap();
        let target = BPoint::from_angle(0.8);
        let hits = (0..10_000)
            .map(|k| BPoint::from_angle(2.0 * std::f64::consts::PI * k as f64 / 10_000.0))
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| {
                let a = f.apply(&w[0]).angle_to(&target);
                let b = f.apply(&w[1]).angle_to(&target);
                let mid = f.apply(&BPoint::renormalized((*w[0].as_vector() + *w[1].as_vector()) * 0.5));
                a.min(b) < 2e-3 && mid.angle_to(&target) <= a.min(b)
            })
            .count();
        assert_eq!(hits, 2);
    }

    #[test]
    fn power_on_s2_matches_complex_arithmetic() {
        let f = SphereMap::<f64>::power(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = BPoint::<f64>::random(3, &mut rng);
            let v = p.as_vector();
            // Stereographic coordinate from the south pole.
            let (zr, zi) = (v[0] / (1.0 + v[2]), v[1] / (1.0 + v[2]));
            let (mut wr, mut wi) = (1.0, 0.0);
            for _ in 0..3 {
                let r = wr * zr - wi * zi;
                wi = wr * zi + wi * zr;
                wr = r;
            }
            let m = wr * wr + wi * wi;
            let expected = [2.0 * wr / (1.0 + m), 2.0 * wi / (1.0 + m), (1.0 - m) / (1.0 + m)];
            let got = f.apply(&p);
            let tol = 1e-9 * (1.0 + m);
            for i in 0..3 {
                assert!((got.as_vector()[i] - expected[i]).abs() < tol, "{got:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn stretch_inverse_pair_is_identity() {
        let pivot = BPoint::<f64>::from_f64(&[0.3, -0.2, 0.9]).unwrap();
        let f = SphereMap::radial_stretch(2.0, pivot).unwrap();
        let g = SphereMap::radial_stretch(0.5, pivot).unwrap();
        let fg = SphereMap::compose(f, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p = BPoint::random(3, &mut rng);
            if fg.near_singular(&p, 1e-3) {
                continue;
            }
            assert!(fg.apply(&p).angle_to(&p) < 1e-8);
        }
        assert!(SphereMap::<f64>::radial_stretch(0.0, pivot).is_err());
        let one = SphereMap::radial_stretch(1.0, pivot).unwrap();
        let p = BPoint::random(3, &mut rng);
        assert!(one.apply(&p).angle_to(&p) < 1e-12);
    }

    #[test]
    fn stretch_on_circle_fixes_pivot_and_antipode() {
        let pivot = BPoint::<f64>::from_angle(1.0);
        let f = SphereMap::radial_stretch(2.0, pivot).unwrap();
        assert!(f.apply(&pivot).angle_to(&pivot) < 1e-12);
        assert!(f.apply(&pivot.antipode()).angle_to(&pivot.antipode()) < 1e-12);
        let side = BPoint::from_angle(1.0 + std::f64::consts::FRAC_PI_2);
        assert!(f.apply(&side).angle_to(&side) < 1e-12);
    }

    #[test]
    fn winding_keeps_latitude() {
        let f = SphereMap::<f64>::winding(2).unwrap();
        let p = BPoint::from_spherical(0.7, 0.4);
        let q = f.apply(&p);
        assert!((q.as_vector()[2] - p.as_vector()[2]).abs() < 1e-15);
        assert!((q.as_vector()[1].atan2(q.as_vector()[0]) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn qs_with_identity_homeo_is_power() {
        let f = SphereMap::<f64>::qs_covering(QsCovering::new(Lift::Identity, 3).unwrap());
        let g = SphereMap::<f64>::power(1, 3).unwrap();
        for k in 0..100 {
            let p = BPoint::from_angle(0.0628 * k as f64);
            assert!(f.apply(&p).angle_to(&g.apply(&p)) < 1e-12);
        }
    }

    #[test]
    fn isometry_view_of_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = MobiusIsometry::<f64>::random(3, 1.0, &mut rng);
        let h = MobiusIsometry::<f64>::random(3, 1.0, &mut rng);
        let f = SphereMap::compose(SphereMap::mobius(g), SphereMap::mobius(h)).unwrap();
        let iso = f.as_isometry().unwrap();
        let p = BPoint::random(3, &mut rng);
        assert!(iso.apply_boundary(&p).angle_to(&f.apply(&p)) < 1e-10);
        assert!(SphereMap::<f64>::power(2, 2).unwrap().as_isometry().is_none());
    }
}
