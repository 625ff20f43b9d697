//! The Busemann functional of a boundary measure and its minimizer.

use super::measure::{map_nodes, DiscreteMeasure};
use super::{BarycenterError, SolverOptions};
use crate::hyperbolic::{busemann, direction_to_boundary, transvect, HPoint, Tangent};
use crate::linalg::{Matrix, Vector};
use crate::Real;

/// Largest single weight accepted by [`barycenter`].
pub const MAX_ATOM: f64 = 1.0 - 1e-6;

/// Newton steps are shortened to at most this hyperbolic length.
const MAX_STEP: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalValue<T> {
    pub value: T,
    pub gradient: Tangent<T>,
    pub hessian: Matrix<T>,
}

/// `sum w_i B_o(y, theta_i)` with its gradient and Hessian in the frame at `y`.
pub fn busemann_functional<T: Real>(mu: &DiscreteMeasure<T>, y: &HPoint<T>) -> FunctionalValue<T> {
    let value = mu.integrate(|p| busemann(y, p));
    let dirs = map_nodes(mu.nodes(), |p| *direction_to_boundary(y, p).frame());
    let (pull, spread) = moments(&dirs, mu.weights());
    FunctionalValue { value, gradient: Tangent(-pull), hessian: Matrix::identity(y.dim()) - spread }
}

/// `sum w_i psi_i` and `sum w_i psi_i psi_i^T`.
fn moments<T: Real>(dirs: &[Vector<T>], weights: &[T]) -> (Vector<T>, Matrix<T>) {
    let dim = dirs[0].dim();
    let mut pull = Vector::zeros(dim);
    let mut spread = Matrix::zeros(dim);
    for (psi, w) in dirs.iter().zip(weights) {
        pull += *psi * *w;
        spread = spread + psi.outer(psi).scale(*w);
    }
    (pull, spread)
}

/// `B_o(z, psi)` for `z` near the origin, without the cancellation of the
/// generic formula.
fn busemann_near_origin<T: Real>(z: &Vector<T>, psi: &Vector<T>) -> T {
    let zz = z.norm_squared();
    (zz - T::two() * z.dot(psi)).ln_1p() - (-zz).ln_1p()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarycenterResult<T> {
    pub point: HPoint<T>,
    pub gradient_norm: T,
    pub iterations: usize,
    pub hessian_min_eig: T,
}

/// Half the weighted Euclidean mean of the nodes.
pub fn initial_guess<T: Real>(mu: &DiscreteMeasure<T>) -> HPoint<T> {
    HPoint::saturating(mu.first_moment() * T::half())
}

/// The minimizer of the Busemann functional, by damped Newton iteration from
/// [`initial_guess`].
pub fn barycenter<T: Real>(
    mu: &DiscreteMeasure<T>,
    opts: &SolverOptions<T>,
) -> Result<BarycenterResult<T>, BarycenterError> {
    barycenter_from(mu, initial_guess(mu), opts)
}

/// Damped Newton iteration from `start`. Each step is taken in the frame at
/// the current iterate, where the moved measure has directions
/// `psi_i = n_{theta_i}(y)`; the line search compares values through the
/// cocycle `B_o(T_y z, theta) - B_o(y, theta) = B_o(z, psi)`.
pub fn barycenter_from<T: Real>(
    mu: &DiscreteMeasure<T>,
    start: HPoint<T>,
    opts: &SolverOptions<T>,
) -> Result<BarycenterResult<T>, BarycenterError> {
    let top = mu.max_weight().to_f64_lossy();
    if top >= MAX_ATOM {
        return Err(BarycenterError::TooConcentrated(top));
    }
    if start.dim() != mu.dim() {
        return Err(BarycenterError::DimensionMismatch { expected: mu.dim(), found: start.dim() });
    }
    let weights = mu.weights();
    let dim = mu.dim();
    let armijo = T::lit(1e-4);
    let mut y = start;
    let mut gnorm = T::infinity();
    for iteration in 0..=opts.max_iter {
        let dirs = map_nodes(mu.nodes(), |p| *direction_to_boundary(&y, p).frame());
        let (pull, spread) = moments(&dirs, weights);
        gnorm = pull.norm();
        if !gnorm.is_finite() {
            break;
        }
        let hessian = Matrix::identity(dim) - spread;
        if gnorm <= opts.tol {
            return Ok(BarycenterResult {
                point: y,
                gradient_norm: gnorm,
                iterations: iteration,
                hessian_min_eig: hessian.symmetric_eigenvalues()[0],
            });
        }
        if iteration == opts.max_iter {
            break;
        }
        let mut step = hessian.solve(&pull).filter(|s| s.is_finite() && s.dot(&pull) > T::zero()).unwrap_or(pull);
        let len = step.norm();
        if len > T::lit(MAX_STEP) {
            step = step * (T::lit(MAX_STEP) / len);
        }
        let slope = -pull.dot(&step);
        let to_ball = |v: Vector<T>| {
            let l = v.norm();
            v * ((l * T::half()).tanh() / l)
        };
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let z = to_ball(step * t);
            let delta: T = dirs.iter().zip(weights).map(|(psi, w)| *w * busemann_near_origin(&z, psi)).sum();
            if delta <= armijo * t * slope {
                accepted = Some(z);
                break;
            }
            t = t * T::half();
        }
        let z = match accepted {
            Some(z) => z,
            None => {
                let z = to_ball(step);
                let moved = HPoint::saturating(transvect(y.coords(), &z));
                let dirs = map_nodes(mu.nodes(), |p| *direction_to_boundary(&moved, p).frame());
                if moments(&dirs, weights).0.norm() >= gnorm {
                    return Err(BarycenterError::Stalled {
                        gradient_norm: gnorm.to_f64_lossy(),
                        last: y.coords().to_f64_vec(),
                    });
                }
                z
            }
        };
        y = HPoint::saturating(transvect(y.coords(), &z));
    }
    Err(BarycenterError::MaxIterations {
        iterations: opts.max_iter,
        gradient_norm: gnorm.to_f64_lossy(),
        last: y.coords().to_f64_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::measure::quadrature;
    use super::*;
    use crate::hyperbolic::{dist, exp_map, BPoint, MobiusIsometry, RoundBall};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lumpy(seed: u64, n: usize, count: usize) -> DiscreteMeasure<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes: Vec<_> = (0..count).map(|_| BPoint::random(n + 1, &mut rng)).collect();
        let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 0.1).collect();
        DiscreteMeasure::normalized(nodes, weights).unwrap()
    }

    #[test]
    fn uniform_measure_is_balanced_at_origin() {
        for (n, count) in [(1, 64), (2, 512)] {
            let mu = quadrature::<f64>(n, count).unwrap();
            let v = busemann_functional(&mu, &HPoint::origin(n + 1));
            assert!(v.value.abs() < 1e-15 && v.gradient.norm() < 1e-12);
            let b = barycenter(&mu, &SolverOptions::default()).unwrap();
            assert!(b.point.coords().norm() < 1e-8);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mu = lumpy(3, 2, 40);
        let h = 1e-4;
        let along = |y: &HPoint<f64>, v: &Vector<f64>, t: f64| busemann_functional(&mu, &exp_map(y, &Tangent(*v * t)));
        let y = HPoint::from_f64(&[0.2, -0.3, 0.1]).unwrap();
        let at = busemann_functional(&mu, &y);
        for k in 0..3 {
            let e = Vector::basis(3, k);
            let (plus, minus) = (along(&y, &e, h).value, along(&y, &e, -h).value);
            assert!(((plus - minus) / (2.0 * h) - at.gradient.frame()[k]).abs() < 1e-6);
            assert!(((plus - 2.0 * at.value + minus) / (h * h) - at.hessian[(k, k)]).abs() < 1e-4);
        }
        // Frames along geodesics from the origin are parallel, so gradient
        // differences there give the full Hessian.
        let o = HPoint::origin(3);
        let at_o = busemann_functional(&mu, &o);
        for k in 0..3 {
            let e = Vector::basis(3, k);
            let col = (*along(&o, &e, h).gradient.frame() - *along(&o, &e, -h).gradient.frame()) * (0.5 / h);
            for j in 0..3 {
                assert!((col[j] - at_o.hessian[(j, k)]).abs() < 1e-6);
            }
        }
        assert!(at.hessian.symmetric_eigenvalues()[0] >= 0.0);
    }

    #[test]
    fn returned_point_is_stationary() {
        let mu = lumpy(11, 2, 30);
        let b = barycenter(&mu, &SolverOptions::default()).unwrap();
        let g = busemann_functional(&mu, &b.point).gradient;
        assert!(g.norm() <= 1e-9 && b.gradient_norm <= 1e-9);
        assert!(b.hessian_min_eig > 0.0);
    }

    #[test]
    fn rejects_near_atomic_measures() {
        let a = BPoint::from_angle(0.0);
        let b = BPoint::from_angle(2.0);
        let mu = DiscreteMeasure::new(vec![a, b], vec![1.0 - 1e-7, 1e-7]).unwrap();
        assert!(matches!(barycenter(&mu, &SolverOptions::default()), Err(BarycenterError::TooConcentrated(_))));
        let tight = SolverOptions { tol: 1e-9, max_iter: 1 };
        let lumpy = lumpy(2, 1, 20);
        assert!(matches!(barycenter(&lumpy, &tight), Err(BarycenterError::MaxIterations { .. })));
    }

    #[test]
    fn equivariance_over_random_isometries() {
        let mu = lumpy(5, 2, 50);
        let base = barycenter(&mu, &SolverOptions::default()).unwrap().point;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let g = MobiusIsometry::random(3, 3.0, &mut rng);
            let moved = barycenter(&mu.transformed(&g), &SolverOptions::default()).unwrap().point;
            worst = worst.max(dist(&moved, &g.apply(&base)));
        }
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn heavy_cap_pulls_the_barycenter_into_its_dome() {
        // Mass 0.7 spread over a small cap, 0.3 over a second cap.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for _ in 0..200 {
            let c1 = BPoint::<f64>::random(3, &mut rng);
            let c2 = BPoint::<f64>::random(3, &mut rng);
            let r = 0.05 + 0.4 * rng.random::<f64>();
            let cap = RoundBall::new(c1, r).unwrap();
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (center, mass) in [(c1, 0.7), (c2, 0.3)] {
                for _ in 0..40 {
                    let v = BPoint::random(3, &mut rng);
                    let p = crate::sphere::sphere_exp(&center, &(crate::sphere::sphere_log(&center, &v) * (0.9 * r / std::f64::consts::PI)));
                    nodes.push(p);
                    weights.push(mass / 40.0);
                }
            }
            let mu = DiscreteMeasure::normalized(nodes, weights).unwrap();
            if mu.integrate(|p| if cap.contains(p) { 1.0 } else { 0.0 }) <= 2.0 / 3.0 {
                continue;
            }
            let b = barycenter(&mu, &SolverOptions::default()).unwrap();
            let sd = cap.signed_distance(&b.point);
            assert!(sd < 1.0, "{sd}");
            checked += 1;
        }
        assert!(checked > 100);
    }

    proptest! {
        #[test]
        fn hessian_is_positive_semidefinite(seed in 0u64..500, x in -0.8f64..0.8, y in -0.5f64..0.5) {
            let mu = lumpy(seed, 1, 5);
            let p = HPoint::from_f64(&[x, y]).unwrap();
            let v = busemann_functional(&mu, &p);
            prop_assert!(v.hessian.symmetric_eigenvalues()[0] >= -1e-12);
            prop_assert!((v.hessian[(0, 1)] - v.hessian[(1, 0)]).abs() < 1e-15);
        }

        #[test]
        fn barycenter_is_stationary(seed in 0u64..500) {
            let mu = lumpy(seed, 2, 12);
            let b = barycenter(&mu, &SolverOptions::default()).unwrap();
            prop_assert!(busemann_functional(&mu, &b.point).gradient.norm() <= 1e-9);
        }
    }
}
