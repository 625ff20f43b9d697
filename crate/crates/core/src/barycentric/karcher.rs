//! Weighted Riemannian center of mass of interior points.

use super::{BarycenterError, SolverOptions};
use crate::hyperbolic::{dist, exp_map, log_map, HPoint, Tangent};
use crate::linalg::{Matrix, Vector};
use crate::Real;

/// Minimizer of `sum w_i d(y, p_i)^2` by Newton iteration with backtracking,
/// started at `start` or at the Euclidean weighted mean.
pub fn karcher_mean<T: Real>(
    points: &[HPoint<T>],
    weights: &[T],
    start: Option<&HPoint<T>>,
    opts: &SolverOptions<T>,
) -> Result<HPoint<T>, BarycenterError> {
    if points.is_empty() {
        return Err(BarycenterError::EmptyCloud);
    }
    if points.len() != weights.len() {
        return Err(BarycenterError::LengthMismatch { nodes: points.len(), weights: weights.len() });
    }
    let dim = points[0].dim();
    let mut y = match start {
        Some(s) => *s,
        None => {
            let mut m = Vector::zeros(dim);
            for (p, w) in points.iter().zip(weights) {
                m += *p.coords() * *w;
            }
            HPoint::saturating(m)
        }
    };
    let energy = |y: &HPoint<T>| -> T { points.iter().zip(weights).map(|(p, w)| *w * dist(y, p).powi(2)).sum() };
    let mut current = energy(&y);
    let mut gnorm = T::infinity();
    for _ in 0..=opts.max_iter {
        let logs: Vec<Tangent<T>> = points.iter().map(|p| log_map(&y, p)).collect();
        let mut pull = Vector::zeros(dim);
        let mut hessian = Matrix::zeros(dim);
        for (u, w) in logs.iter().zip(weights) {
            pull += *u.frame() * *w;
            hessian = hessian + distance_hessian(u.frame()).scale(*w);
        }
        gnorm = pull.norm();
        if gnorm <= opts.tol {
            return Ok(y);
        }
        let step = hessian.solve(&pull).filter(Vector::is_finite).unwrap_or(pull);
        let slope = pull.dot(&step);
        let mut t = T::one();
        let mut next = None;
        for _ in 0..40 {
            let candidate = exp_map(&y, &Tangent(step * t));
            let e = energy(&candidate);
            if e < current && e <= current - T::lit(1e-4) * t * slope {
                next = Some((candidate, e));
                break;
            }
            t = t * T::half();
        }
        match next {
            Some((candidate, e)) => {
                y = candidate;
                current = e;
            }
            // Energy differences are below rounding; the Hessian is at least
            // the identity, so the full step is short and safe.
            None if step.norm() < T::lit(1e-6) => {
                y = exp_map(&y, &Tangent(step));
                current = energy(&y);
            }
            None => break,
        }
    }
    Err(BarycenterError::MaxIterations {
        iterations: opts.max_iter,
        gradient_norm: gnorm.to_f64_lossy(),
        last: y.coords().to_f64_vec(),
    })
}

/// Hessian of `d(., p)^2 / 2` at `y` in frame coordinates, given
/// `u = log_y(p)`.
fn distance_hessian<T: Real>(u: &Vector<T>) -> Matrix<T> {
    let d = u.norm();
    let dim = u.dim();
    if d < T::lit(1e-8) {
        return Matrix::identity(dim);
    }
    let dir = *u * (T::one() / d);
    let radial = dir.outer(&dir);
    let transverse = d / d.tanh();
    radial + (Matrix::identity(dim) - radial).scale(transverse)
}
