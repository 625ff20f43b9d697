//! Finitely supported probability measures on the boundary sphere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BarycenterError;
use crate::boundary_maps::SphereMap;
use crate::hyperbolic::{busemann, BPoint, DensityExponent, HPoint, MobiusIsometry};
use crate::linalg::Vector;
use crate::sphere::{circle_nodes, fibonacci_nodes, gauss_product_nodes, symmetric_fibonacci_nodes};
use crate::Real;

/// Node sets of length at least this are mapped in parallel.
pub(crate) const PARALLEL_MIN: usize = 1024;

pub(crate) fn map_nodes<T, U, F>(nodes: &[BPoint<T>], f: F) -> Vec<U>
where
    T: Real,
    U: Send,
    F: Fn(&BPoint<T>) -> U + Sync + Send,
{
    if nodes.len() >= PARALLEL_MIN {
        nodes.par_iter().map(f).collect()
    } else {
        nodes.iter().map(f).collect()
    }
}

/// Node families for [`quadrature_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Equally spaced angles on `S^1`, or the symmetric Fibonacci lattice on
    /// `S^2`.
    #[default]
    Standard,
    /// Plain Fibonacci lattice on `S^2`.
    Fibonacci,
    /// Gauss-Legendre heights times uniform azimuths on `S^2`; the size is
    /// rounded to `2 k^2`.
    GaussProduct,
}

/// A probability measure with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    nodes: Vec<BPoint<T>>,
    weights: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    pub fn new(nodes: Vec<BPoint<T>>, weights: Vec<T>) -> Result<Self, BarycenterError> {
        if nodes.len() != weights.len() {
            return Err(BarycenterError::LengthMismatch { nodes: nodes.len(), weights: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(BarycenterError::BadWeight(w.to_f64_lossy()));
        }
        let dim = nodes.first().map_or(0, BPoint::dim);
        if let Some(p) = nodes.iter().find(|p| p.dim() != dim) {
            return Err(BarycenterError::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if !nodes.iter().any(|p| p != &nodes[0]) {
            return Err(BarycenterError::Degenerate);
        }
        let mass: T = weights.iter().copied().sum();
        if (mass - T::one()).abs().to_f64_lossy() > T::MASS_TOLERANCE {
            return Err(BarycenterError::Mass(mass.to_f64_lossy()));
        }
        Ok(Self { nodes, weights })
    }

    /// Divides `weights` by their sum before validating.
    pub fn normalized(nodes: Vec<BPoint<T>>, weights: Vec<T>) -> Result<Self, BarycenterError> {
        let mass: T = weights.iter().copied().sum();
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(BarycenterError::Mass(mass.to_f64_lossy()));
        }
        Self::new(nodes, weights.into_iter().map(|w| w / mass).collect())
    }

    pub fn nodes(&self) -> &[BPoint<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ambient dimension `n + 1` of the ball.
    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn max_weight(&self) -> T {
        self.weights.iter().copied().fold(T::zero(), T::max)
    }

    pub fn integrate(&self, f: impl Fn(&BPoint<T>) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| *w * f(p)).sum()
    }

    pub fn first_moment(&self) -> Vector<T> {
        let mut m = Vector::zeros(self.dim());
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            m += *p.as_vector() * *w;
        }
        m
    }

    /// The push-forward under an isometry's boundary action.
    pub fn transformed(&self, g: &MobiusIsometry<T>) -> Self {
        Self { nodes: map_nodes(&self.nodes, |p| g.apply_boundary(p)), weights: self.weights.clone() }
    }

    pub fn cast<U: Real>(&self) -> DiscreteMeasure<U> {
        DiscreteMeasure {
            nodes: self.nodes.iter().map(BPoint::cast).collect(),
            weights: self.weights.iter().map(|w| U::lit(w.to_f64_lossy())).collect(),
        }
    }
}

/// The minimum accepted quadrature size.
pub const MIN_QUADRATURE: usize = 4;

/// Equal-weight quadrature of the normalized round measure on `S^n`:
/// equally spaced angles for `n = 1`, a symmetric Fibonacci lattice for
/// `n = 2` (`count` must then be even).
pub fn quadrature<T: Real>(n: usize, count: usize) -> Result<DiscreteMeasure<T>, BarycenterError> {
    quadrature_with(n, count, QuadratureRule::Standard)
}

pub fn quadrature_with<T: Real>(
    n: usize,
    count: usize,
    rule: QuadratureRule,
) -> Result<DiscreteMeasure<T>, BarycenterError> {
    if count < MIN_QUADRATURE {
        return Err(BarycenterError::QuadratureTooSmall { size: count, min: MIN_QUADRATURE });
    }
    let equal = |nodes: Vec<BPoint<T>>| {
        let w = T::one() / T::lit(nodes.len() as f64);
        let weights = vec![w; nodes.len()];
        DiscreteMeasure::normalized(nodes, weights)
    };
    match (n, rule) {
        (1, _) => equal(circle_nodes(count)),
        (2, QuadratureRule::Standard) => {
            if count % 2 == 1 {
                return Err(BarycenterError::OddQuadrature(count));
            }
            equal(symmetric_fibonacci_nodes(count))
        }
        (2, QuadratureRule::Fibonacci) => equal(fibonacci_nodes(count)),
        (2, QuadratureRule::GaussProduct) => {
            let heights = ((count as f64 / 2.0).sqrt().round() as usize).max(2);
            let (nodes, weights) = gauss_product_nodes(heights, 2 * heights);
            DiscreteMeasure::normalized(nodes, weights)
        }
        _ => Err(BarycenterError::UnsupportedSphere(n)),
    }
}

/// `f_* mu`: nodes mapped through `f`, weights unchanged.
pub fn pushforward<T: Real>(f: &SphereMap<T>, mu: &DiscreteMeasure<T>) -> Result<DiscreteMeasure<T>, BarycenterError> {
    if mu.dim() != f.n() + 1 {
        return Err(BarycenterError::DimensionMismatch { expected: f.n() + 1, found: mu.dim() });
    }
    Ok(DiscreteMeasure { nodes: map_nodes(&mu.nodes, |p| f.apply(p)), weights: mu.weights.clone() })
}

/// Multiplies the weights by `exp(-E B_o(x, theta))` and renormalizes.
pub fn reweight_visual<T: Real>(
    mu: &DiscreteMeasure<T>,
    x: &HPoint<T>,
    exponent: DensityExponent,
) -> Result<DiscreteMeasure<T>, BarycenterError> {
    if mu.dim() != x.dim() {
        return Err(BarycenterError::DimensionMismatch { expected: mu.dim(), found: x.dim() });
    }
    let e = T::lit(exponent.value(x.dim() - 1));
    let logs: Vec<T> = map_nodes(&mu.nodes, |p| -e * busemann(x, p));
    let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let weights = logs.iter().zip(&mu.weights).map(|(l, w)| *w * (*l - top).exp()).collect();
    DiscreteMeasure::normalized(mu.nodes.clone(), weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_rule_of_four() {
        let mu = quadrature::<f64>(1, 4).unwrap();
        for (k, p) in mu.nodes().iter().enumerate() {
            assert!((p.angle().rem_euclid(2.0 * PI) - k as f64 * PI / 2.0).abs() < 1e-12);
        }
        assert!(mu.weights().iter().all(|w| *w == 0.25));
        assert!(quadrature::<f64>(1, 3).is_err());
        assert!(quadrature::<f64>(2, 101).is_err());
        assert!(quadrature::<f64>(3, 100).is_err());
    }

    #[test]
    fn second_moment_of_round_sphere() {
        for rule in [QuadratureRule::Standard, QuadratureRule::Fibonacci, QuadratureRule::GaussProduct] {
            let mu = quadrature_with::<f64>(2, 4096, rule).unwrap();
            assert!((mu.integrate(|p| p.as_vector()[0].powi(2)) - 1.0 / 3.0).abs() < 1e-3, "{rule:?}");
            assert!(mu.first_moment().norm() < 1e-3);
        }
    }

    #[test]
    fn rejects_invalid_measures() {
        let a = BPoint::<f64>::from_angle(0.0);
        let b = BPoint::<f64>::from_angle(1.0);
        assert!(DiscreteMeasure::new(vec![a, b], vec![0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![a, a], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![a, b], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![a, b], vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![a, b], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn doubling_keeps_uniform_moments() {
        let mu = quadrature::<f64>(1, 256).unwrap();
        let f = SphereMap::power(1, 2).unwrap();
        let pushed = pushforward(&f, &mu).unwrap();
        for k in 1..=4 {
            let c = pushed.integrate(|p| (k as f64 * p.angle()).cos());
            let s = pushed.integrate(|p| (k as f64 * p.angle()).sin());
            assert!(c.abs() < 1e-3 && s.abs() < 1e-3, "mode {k}");
        }
        let id = SphereMap::identity(1).unwrap();
        let same = pushforward(&id, &mu).unwrap();
        for (a, b) in same.nodes().iter().zip(mu.nodes()) {
            assert!((*a.as_vector() - *b.as_vector()).max_abs() < 1e-15);
        }
        assert_eq!(same.weights(), mu.weights());
    }

    #[test]
    fn reweighting_at_origin_is_trivial() {
        let mu = quadrature::<f64>(2, 512).unwrap();
        let same = reweight_visual(&mu, &HPoint::origin(3), DensityExponent::Poisson).unwrap();
        for (a, b) in same.weights().iter().zip(mu.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn visual_mass_concentrates_toward_the_point() {
        let theta0 = BPoint::<f64>::from_f64(&[0.0, 0.6, 0.8]).unwrap();
        let x = HPoint::radial(&theta0, 3.0);
        let mu = quadrature::<f64>(2, 20_000).unwrap();
        let w = reweight_visual(&mu, &x, DensityExponent::Poisson).unwrap();
        let cap = w.integrate(|p| if p.angle_to(&theta0) < 0.5 { 1.0 } else { 0.0 });
        assert!(cap >= 0.9, "{cap}");
    }

    #[test]
    fn reweighting_is_a_cocycle() {
        // Reweighting to x and then by the density of T_{-x} at the moved
        // nodes undoes the first step.
        let x = HPoint::<f64>::from_f64(&[0.3, -0.2]).unwrap();
        let mu = quadrature::<f64>(1, 64).unwrap();
        let at_x = reweight_visual(&mu, &x, DensityExponent::Poisson).unwrap();
        let back: Vec<f64> = at_x
            .nodes()
            .iter()
            .zip(at_x.weights())
            .map(|(p, w)| w * (busemann(&x, p)).exp())
            .collect();
        let back = DiscreteMeasure::normalized(mu.nodes().to_vec(), back).unwrap();
        for (a, b) in back.weights().iter().zip(mu.weights()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
