use super::{BPoint, GeometryError, HPoint, MobiusIsometry};
use crate::linalg::{complement_frame, Vector};
use crate::Real;

/// Spherical cap `{theta : d_o(theta, center) <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundBall<T> {
    center: BPoint<T>,
    radius: T,
}

/// `{theta : inner <= d_o(theta, center) <= outer}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundAnnulus<T> {
    center: BPoint<T>,
    inner: T,
    outer: T,
}

/// Hyperbolic convex hull of a cap or annulus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dome<T> {
    Ball(RoundBall<T>),
    Annulus(RoundAnnulus<T>),
}

fn check_radius<T: Real>(r: T) -> Result<(), GeometryError> {
    if r > T::zero() && r < T::PI() {
        Ok(())
    } else {
        Err(GeometryError::InvalidRadius(r.to_f64_lossy()))
    }
}

impl<T: Real> RoundBall<T> {
    pub fn new(center: BPoint<T>, radius: T) -> Result<Self, GeometryError> {
        check_radius(radius)?;
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &BPoint<T> {
        &self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// The concentric ball `lambda * B`.
    pub fn scaled(&self, lambda: T) -> Result<Self, GeometryError> {
        let r = self.radius * lambda;
        if r >= T::PI() {
            return Err(GeometryError::ScaledRadiusTooLarge(r.to_f64_lossy()));
        }
        Self::new(self.center, r)
    }

    pub fn contains(&self, theta: &BPoint<T>) -> bool {
        self.center.angle_to(theta) <= self.radius
    }

    /// Normalized round measure of the cap.
    pub fn measure(&self) -> T {
        match self.center.dim() {
            2 => self.radius / T::PI(),
            _ => (T::one() - self.radius.cos()) * T::half(),
        }
    }

    /// Signed distance to the wall `∂Dome(B)`, negative inside the dome.
    pub fn signed_distance(&self, x: &HPoint<T>) -> T {
        let (x0, xv) = x.hyperboloid();
        let (s, c) = self.radius.sin_cos();
        ((x0 * c - xv.dot(self.center.as_vector())) / s).asinh()
    }

    /// Image of the cap under an isometry, recovered from the image of its
    /// boundary sphere.
    pub fn image(&self, g: &MobiusIsometry<T>) -> Self {
        let c = *self.center.as_vector();
        let (s, co) = self.radius.sin_cos();
        let frame = complement_frame(&c);
        let rim: Vec<Vector<T>> = match c.dim() {
            2 => vec![c * co + frame[0] * s, c * co - frame[0] * s],
            _ => (0..3)
                .map(|k| {
                    let phi = T::lit(k as f64 * 2.0 * std::f64::consts::PI / 3.0);
                    c * co + (frame[0] * phi.cos() + frame[1] * phi.sin()) * s
                })
                .collect(),
        };
        let rim: Vec<Vector<T>> = rim.iter().map(|p| g.apply_vector(p)).collect();
        let normal = match c.dim() {
            2 => match (rim[0] + rim[1]).normalized() {
                Some(n) => n,
                None => Vector::from_slice(&[-rim[0][1], rim[0][0]]),
            },
            _ => (rim[1] - rim[0]).cross(&(rim[2] - rim[0])).normalized().unwrap_or(rim[0]),
        };
        let inside = g.apply_vector(&c);
        let level = normal.dot(&rim[0]);
        let normal = if inside.dot(&normal) >= level { normal } else { -normal };
        let radius = normal.dot(&rim[0]).max(-T::one()).min(T::one()).acos();
        Self { center: BPoint::renormalized(normal), radius }
    }
}

impl<T: Real> RoundAnnulus<T> {
    pub fn new(center: BPoint<T>, inner: T, outer: T) -> Result<Self, GeometryError> {
        check_radius(inner)?;
        check_radius(outer)?;
        if inner >= outer {
            return Err(GeometryError::InvalidAnnulus { inner: inner.to_f64_lossy(), outer: outer.to_f64_lossy() });
        }
        Ok(Self { center, inner, outer })
    }

    /// Annulus whose stereographic image from `-center` is bounded by
    /// concentric circles of Euclidean radii `r < big_r`.
    pub fn from_concentric(center: BPoint<T>, r: T, big_r: T) -> Result<Self, GeometryError> {
        Self::new(center, T::two() * r.atan(), T::two() * big_r.atan())
    }

    pub fn center(&self) -> &BPoint<T> {
        &self.center
    }

    pub fn inner_radius(&self) -> T {
        self.inner
    }

    pub fn outer_radius(&self) -> T {
        self.outer
    }

    pub fn inner_ball(&self) -> RoundBall<T> {
        RoundBall { center: self.center, radius: self.inner }
    }

    pub fn outer_ball(&self) -> RoundBall<T> {
        RoundBall { center: self.center, radius: self.outer }
    }

    pub fn contains(&self, theta: &BPoint<T>) -> bool {
        let a = self.center.angle_to(theta);
        a >= self.inner && a <= self.outer
    }

    /// `log(R / r)` of the concentric representation; also the distance
    /// between the two walls of the dome.
    pub fn log_ratio(&self) -> T {
        ((self.outer * T::half()).tan() / (self.inner * T::half()).tan()).ln()
    }
}

impl<T: Real> Dome<T> {
    /// Signed distance to the dome, negative inside. For an annulus it is the
    /// larger of the two wall distances, which is exact because the walls are
    /// disjoint and nested.
    pub fn signed_distance(&self, x: &HPoint<T>) -> T {
        match self {
            Dome::Ball(b) => b.signed_distance(x),
            Dome::Annulus(a) => (-a.inner_ball().signed_distance(x)).max(a.outer_ball().signed_distance(x)),
        }
    }

    /// Points on the wall belong to the dome.
    pub fn contains(&self, x: &HPoint<T>) -> bool {
        self.signed_distance(x) <= T::zero()
    }

    pub fn distance(&self, x: &HPoint<T>) -> T {
        self.signed_distance(x).max(T::zero())
    }
}

pub fn dome_signed_distance<T: Real>(dome: &Dome<T>, x: &HPoint<T>) -> T {
    dome.signed_distance(x)
}

/// The point where `[o, center)` crosses the wall of the dome.
pub fn dome_center<T: Real>(ball: &RoundBall<T>) -> HPoint<T> {
    let t = (T::one() / (ball.radius * T::half()).tan()).ln();
    HPoint::radial(&ball.center, t)
}

/// Riemannian volume `omega_k` of the unit `k`-sphere.
pub fn sphere_measure(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => sphere_measure(k - 2) * 2.0 * PI / (k as f64 - 1.0),
    }
}

/// `omega_{n-1} * d^{1-n}`.
pub fn modulus_from_distance(n: usize, d: f64) -> f64 {
    sphere_measure(n - 1) * d.powf(1.0 - n as f64)
}

/// Conformal modulus of a round annulus of `S^2`.
pub fn mod_round_annulus<T: Real>(annulus: &RoundAnnulus<T>) -> Result<T, GeometryError> {
    if annulus.center.dim() != 3 {
        return Err(GeometryError::ModulusNeedsSphere2);
    }
    Ok(T::lit(sphere_measure(1)) / annulus.log_ratio())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::dist;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn north() -> BPoint<f64> {
        BPoint::from_f64(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn radius_bounds_are_enforced() {
        assert!(RoundBall::new(north(), 0.0).is_err());
        assert!(RoundBall::new(north(), PI).is_err());
        let b = RoundBall::new(north(), 1.0).unwrap();
        assert!(b.scaled(3.5).is_err());
        assert!((b.scaled(0.5).unwrap().radius() - 0.5).abs() < 1e-15);
        assert!(RoundAnnulus::new(north(), 1.0, 1.0).is_err());
    }

    #[test]
    fn equatorial_dome_is_centered_at_origin() {
        let b = RoundBall::new(north(), PI / 2.0).unwrap();
        assert!(dome_center(&b).coords().max_abs() < 1e-15);
    }

    #[test]
    fn dome_center_distance_matches_bisection() {
        // Oracle: bisect along the axis for the point from which the cap is
        // seen with visual radius pi/2.
        for r in [0.2, 0.7, 1.3, 2.0] {
            let b = RoundBall::new(north(), r).unwrap();
            let rim = BPoint::from_spherical(r, 0.3);
            let seen = |t: f64| {
                let x = HPoint::radial(&north(), t);
                crate::hyperbolic::visual_angle(&x, &north(), &rim)
            };
            let (mut lo, mut hi) = (-20.0, 20.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if seen(mid) < PI / 2.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let expected = 0.5 * (lo + hi);
            let got = dist(&HPoint::origin(3), &dome_center(&b)) * expected.signum();
            assert!((got - expected).abs() < 1e-8, "{r}: {got} vs {expected}");
            assert!((got - (1.0 / (r / 2.0).tan()).ln()).abs() < 1e-8);
            assert!(b.signed_distance(&dome_center(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_distance_sign_and_magnitude() {
        let b = RoundBall::new(north(), 0.5).unwrap();
        let o = HPoint::origin(3);
        let c = dome_center(&b);
        assert!((b.signed_distance(&o) - dist(&o, &c)).abs() < 1e-12);
        let deeper = HPoint::radial(&north(), dist(&o, &c) + 0.75);
        assert!((b.signed_distance(&deeper) + 0.75).abs() < 1e-12);
        assert!(Dome::Ball(b).contains(&deeper));
        assert!(!Dome::Ball(b).contains(&o));
    }

    #[test]
    fn signed_distance_is_equivariant_under_stabilizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = RoundBall::new(north(), 0.8).unwrap();
        for _ in 0..50 {
            let x = HPoint::<f64>::random(3, 3.0, &mut rng);
            let spin = MobiusIsometry::axis_rotation(&north(), rand::Rng::random::<f64>(&mut rng) * 6.0);
            assert!((b.signed_distance(&x) - b.signed_distance(&spin.apply(&x))).abs() < 1e-12);
        }
    }

    #[test]
    fn image_of_cap_under_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            for _ in 0..50 {
                let g = MobiusIsometry::<f64>::random(dim, 2.0, &mut rng);
                let b = RoundBall::new(BPoint::random(dim, &mut rng), 0.3 + 2.0 * rand::Rng::random::<f64>(&mut rng)).unwrap();
                let img = b.image(&g);
                for _ in 0..200 {
                    let theta = BPoint::random(dim, &mut rng);
                    let margin = (b.center().angle_to(&theta) - b.radius()).abs();
                    if margin > 1e-6 {
                        assert_eq!(b.contains(&theta), img.contains(&g.apply_boundary(&theta)));
                    }
                }
                let x = HPoint::random(dim, 2.0, &mut rng);
                assert!((b.signed_distance(&x) - img.signed_distance(&g.apply(&x))).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn modulus_of_concentric_annulus() {
        let a = RoundAnnulus::from_concentric(north(), 1.0, std::f64::consts::E).unwrap();
        assert!((mod_round_annulus(&a).unwrap() - 2.0 * PI).abs() < 1e-12);
        let squared = RoundAnnulus::from_concentric(north(), 1.0, std::f64::consts::E.powi(2)).unwrap();
        assert!((mod_round_annulus(&squared).unwrap() - 0.5 * 2.0 * PI).abs() < 1e-12);
        let circle = RoundAnnulus::new(BPoint::from_angle(0.0), 0.5, 1.0).unwrap();
        assert_eq!(mod_round_annulus(&circle), Err(GeometryError::ModulusNeedsSphere2));
    }

    #[test]
    fn wall_distance_equals_log_ratio() {
        let a = RoundAnnulus::new(north(), 0.4, 1.9).unwrap();
        let inner = dome_center(&a.inner_ball());
        let outer = dome_center(&a.outer_ball());
        assert!((dist(&inner, &outer) - a.log_ratio()).abs() < 1e-12);
        let m = mod_round_annulus(&a).unwrap();
        assert!((m - modulus_from_distance(2, dist(&inner, &outer))).abs() < 1e-10);
    }

    #[test]
    fn modulus_decreases_with_ratio() {
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let a = RoundAnnulus::new(north(), 0.3, 0.3 + 0.13 * k as f64).unwrap();
            let m = mod_round_annulus(&a).unwrap();
            assert!(m < last);
            last = m;
        }
    }

    #[test]
    fn far_caps_look_small() {
        // Sampling oracle: max pairwise visual angle of rim points.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 1000 {
            let b = RoundBall::new(BPoint::random(3, &mut rng), 0.05 + 3.0 * rand::Rng::random::<f64>(&mut rng)).unwrap();
            let x = HPoint::<f64>::random(3, 5.0, &mut rng);
            if Dome::Ball(b).distance(&x) < 1.0 {
                continue;
            }
            checked += 1;
            let frame = complement_frame(b.center().as_vector());
            let (s, c) = b.radius().sin_cos();
            let rim: Vec<BPoint<f64>> = (0..24)
                .map(|k| {
                    let phi = k as f64 * PI / 12.0;
                    BPoint::new(*b.center().as_vector() * c + (frame[0] * phi.cos() + frame[1] * phi.sin()) * s).unwrap()
                })
                .collect();
            let mut diam: f64 = 0.0;
            for p in &rim {
                for q in &rim {
                    diam = diam.max(crate::hyperbolic::visual_angle(&x, p, q));
                }
            }
            assert!(diam < PI / 2.0, "{diam}");
        }
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_measure(0), 2.0);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_measure(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }
}
