use super::dome::RoundAnnulus;
use super::{dist, transvect, BPoint, GeometryError, HPoint};
use crate::linalg::Vector;
use crate::Real;

/// What is being projected onto a segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProjectionTarget<T> {
    Interior(HPoint<T>),
    Ideal(BPoint<T>),
}

impl<T> From<HPoint<T>> for ProjectionTarget<T> {
    fn from(p: HPoint<T>) -> Self {
        Self::Interior(p)
    }
}

impl<T> From<BPoint<T>> for ProjectionTarget<T> {
    fn from(p: BPoint<T>) -> Self {
        Self::Ideal(p)
    }
}

/// A segment `[x, y]` moved so that `x` sits at the origin.
struct Segment<T> {
    x: HPoint<T>,
    axis: Vector<T>,
    length: T,
}

impl<T: Real> Segment<T> {
    fn new(x: &HPoint<T>, y: &HPoint<T>) -> Result<Self, GeometryError> {
        let moved = transvect(&-*x.coords(), y.coords());
        let axis = moved.normalized().ok_or(GeometryError::DegenerateSegment)?;
        let length = dist(x, y);
        if length <= T::epsilon() {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Self { x: *x, axis, length })
    }

    /// Unclamped arclength parameter of the foot of `p` on the full geodesic.
    /// `Err(true)` and `Err(false)` stand for `+∞` and `-∞`.
    fn foot(&self, p: &ProjectionTarget<T>) -> Result<T, bool> {
        let back = -*self.x.coords();
        let ratio = match p {
            ProjectionTarget::Interior(q) => {
                let moved = HPoint::saturating(transvect(&back, q.coords()));
                let (x0, xv) = moved.hyperboloid();
                xv.dot(&self.axis) / x0
            }
            ProjectionTarget::Ideal(theta) => transvect(&back, theta.as_vector()).dot(&self.axis),
        };
        if ratio >= T::one() {
            Err(true)
        } else if ratio <= -T::one() {
            Err(false)
        } else {
            Ok(ratio.atanh())
        }
    }

    fn clamped_foot(&self, p: &ProjectionTarget<T>) -> T {
        match self.foot(p) {
            Ok(s) => s.max(T::zero()).min(self.length),
            Err(true) => self.length,
            Err(false) => T::zero(),
        }
    }

    fn point_at(&self, s: T) -> HPoint<T> {
        HPoint::saturating(transvect(self.x.coords(), &(self.axis * (s * T::half()).tanh())))
    }
}

/// Nearest-point projection onto the segment `[x, y]`. For an ideal point
/// this is the minimizer of its Busemann function along the segment.
pub fn convex_project<T: Real>(
    x: &HPoint<T>,
    y: &HPoint<T>,
    p: impl Into<ProjectionTarget<T>>,
) -> Result<HPoint<T>, GeometryError> {
    let seg = Segment::new(x, y)?;
    let s = seg.clamped_foot(&p.into());
    if s == T::zero() {
        Ok(*x)
    } else if s == seg.length {
        Ok(*y)
    } else {
        Ok(seg.point_at(s))
    }
}

/// The set `A(x, y)` of ideal points projecting into the open segment.
pub struct ConformalAnnulus<T> {
    segment: Segment<T>,
    y: HPoint<T>,
}

pub fn conformal_annulus<T: Real>(x: &HPoint<T>, y: &HPoint<T>) -> Result<ConformalAnnulus<T>, GeometryError> {
    Ok(ConformalAnnulus { segment: Segment::new(x, y)?, y: *y })
}

impl<T: Real> ConformalAnnulus<T> {
    pub fn contains(&self, theta: &BPoint<T>) -> bool {
        match self.segment.foot(&ProjectionTarget::Ideal(*theta)) {
            Ok(s) => s > T::zero() && s < self.segment.length,
            Err(_) => false,
        }
    }

    /// The round-annulus description, available when the geodesic through
    /// the endpoints passes through the origin.
    pub fn as_round(&self) -> Option<RoundAnnulus<T>> {
        let x = self.segment.x.coords();
        let y = self.y.coords();
        let u = (*y - *x).normalized()?;
        // Collinearity with the origin: the component of x orthogonal to u.
        let off_axis = (*x - u * u.dot(x)).norm();
        if off_axis > T::lit(1e3) * T::epsilon() {
            return None;
        }
        let signed = |p: &Vector<T>| T::two() * u.dot(p).atanh();
        let (sx, sy) = (signed(x), signed(y));
        let center = BPoint::new(u).ok()?;
        RoundAnnulus::new(center, sy.tanh().acos(), sx.tanh().acos()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::busemann;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projecting_an_endpoint_returns_it() {
        let x = HPoint::<f64>::from_f64(&[0.1, 0.2, -0.3]).unwrap();
        let y = HPoint::<f64>::from_f64(&[-0.4, 0.1, 0.2]).unwrap();
        assert_eq!(convex_project(&x, &y, x).unwrap(), x);
        assert!(convex_project(&x, &x, y).is_err());
    }

    #[test]
    fn points_on_the_segment_are_fixed() {
        let x = HPoint::<f64>::from_f64(&[0.1, 0.2, -0.3]).unwrap();
        let y = HPoint::<f64>::from_f64(&[-0.4, 0.1, 0.2]).unwrap();
        let seg = Segment::new(&x, &y).unwrap();
        for frac in [0.1, 0.5, 0.9] {
            let p = seg.point_at(frac * seg.length);
            assert!(dist(&convex_project(&x, &y, p).unwrap(), &p) < 1e-9);
        }
    }

    #[test]
    fn ideal_projection_matches_dense_busemann_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = HPoint::<f64>::random(3, 2.0, &mut rng);
            let y = HPoint::<f64>::random(3, 2.0, &mut rng);
            let theta = BPoint::random(3, &mut rng);
            let seg = Segment::new(&x, &y).unwrap();
            let steps = 20_000;
            let best = (0..=steps)
                .map(|k| seg.point_at(seg.length * k as f64 / steps as f64))
                .min_by(|a, b| busemann(a, &theta).total_cmp(&busemann(b, &theta)))
                .unwrap();
            let proj = convex_project(&x, &y, theta).unwrap();
            assert!(dist(&proj, &best) < 2.0 * seg.length / steps as f64 + 1e-9);
        }
    }

    #[test]
    fn interior_projection_minimizes_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x = HPoint::<f64>::random(2, 2.0, &mut rng);
            let y = HPoint::<f64>::random(2, 2.0, &mut rng);
            let p = HPoint::<f64>::random(2, 3.0, &mut rng);
            let seg = Segment::new(&x, &y).unwrap();
            let proj = convex_project(&x, &y, p).unwrap();
            let best = (0..=5000)
                .map(|k| dist(&seg.point_at(seg.length * k as f64 / 5000.0), &p))
                .fold(f64::INFINITY, f64::min);
            assert!(dist(&proj, &p) <= best + 1e-9);
        }
    }

    #[test]
    fn annulus_is_symmetric_and_excludes_endpoints() {
        let x = HPoint::<f64>::from_f64(&[0.1, 0.3]).unwrap();
        let y = HPoint::<f64>::from_f64(&[-0.5, 0.2]).unwrap();
        let a = conformal_annulus(&x, &y).unwrap();
        let b = conformal_annulus(&y, &x).unwrap();
        for k in 0..720 {
            let theta = BPoint::from_angle(k as f64 * std::f64::consts::PI / 360.0);
            assert_eq!(a.contains(&theta), b.contains(&theta), "{theta:?}");
        }
        let forward = BPoint::new(transvect(x.coords(), &a.segment.axis)).unwrap();
        let backward = BPoint::new(transvect(x.coords(), &-a.segment.axis)).unwrap();
        assert!(!a.contains(&forward));
        assert!(!a.contains(&backward));
    }

    #[test]
    fn diameter_segment_gives_round_annulus_matching_membership_scan() {
        let u = BPoint::<f64>::from_f64(&[0.0, 0.6, 0.8]).unwrap();
        let x = HPoint::radial(&u, -0.7);
        let y = HPoint::radial(&u, 1.3);
        let a = conformal_annulus(&x, &y).unwrap();
        let round = a.as_round().expect("segment through the origin");
        // Membership scan along a meridian from u to -u.
        let perp = Vector::from_f64(&[1.0, 0.0, 0.0]);
        let steps = 200_000;
        let mut first = None;
        let mut last = None;
        for k in 0..=steps {
            let t = std::f64::consts::PI * k as f64 / steps as f64;
            let theta = BPoint::new(*u.as_vector() * t.cos() + perp * t.sin()).unwrap();
            if a.contains(&theta) {
                first.get_or_insert(t);
                last = Some(t);
            }
        }
        let h = std::f64::consts::PI / steps as f64;
        assert!((first.unwrap() - round.inner_radius()).abs() < 2.0 * h);
        assert!((last.unwrap() - round.outer_radius()).abs() < 2.0 * h);
        assert!((round.inner_radius() - (1.3f64).tanh().acos()).abs() < 1e-12);
    }
}
