//! Round-sphere helpers: exponential and logarithm maps, oriented tangent
//! frames, and quadrature node sets on `S^1` and `S^2`.

use crate::hyperbolic::BPoint;
use crate::linalg::{complement_frame, Vector};
use crate::Real;

/// Great-circle exponential map at `p` applied to the tangent vector `v`.
pub fn sphere_exp<T: Real>(p: &BPoint<T>, v: &Vector<T>) -> BPoint<T> {
    let len = v.norm();
    if len == T::zero() {
        return *p;
    }
    let (s, c) = len.sin_cos();
    BPoint::renormalized(*p.as_vector() * c + *v * (s / len))
}

/// Inverse of [`sphere_exp`] away from the antipode of `p`.
pub fn sphere_log<T: Real>(p: &BPoint<T>, q: &BPoint<T>) -> Vector<T> {
    let pv = *p.as_vector();
    let qv = *q.as_vector();
    let tangential = qv - pv * pv.dot(&qv);
    match tangential.normalized() {
        Some(dir) => dir * p.angle_to(q),
        None => Vector::zeros(p.dim()),
    }
}

/// Orthonormal basis of `T_p S^n`, oriented so that `p` followed by the
/// frame is positively oriented in `R^{n+1}`.
pub fn tangent_frame<T: Real>(p: &BPoint<T>) -> Vec<Vector<T>> {
    complement_frame(p.as_vector())
}

/// `count` equally spaced points of `S^1`, starting at angle 0.
pub fn circle_nodes<T: Real>(count: usize) -> Vec<BPoint<T>> {
    (0..count)
        .map(|k| BPoint::from_angle(T::lit(2.0 * std::f64::consts::PI * k as f64 / count as f64)))
        .collect()
}

/// Golden-angle spiral with `count` points of nearly equal area.
pub fn fibonacci_nodes<T: Real>(count: usize) -> Vec<BPoint<T>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            BPoint::renormalized(Vector::from_f64(&[rho * phi.cos(), rho * phi.sin(), z]))
        })
        .collect()
}

/// Fibonacci spiral of `count / 2` points together with their antipodes, so
/// every odd moment vanishes exactly. `count` must be even.
pub fn symmetric_fibonacci_nodes<T: Real>(count: usize) -> Vec<BPoint<T>> {
    let half = fibonacci_nodes::<T>(count / 2);
    let mut nodes = half.clone();
    nodes.extend(half.iter().map(|p| p.antipode()));
    nodes
}

/// Tensor rule: Gauss-Legendre in the height `z` times the uniform rule in
/// the azimuth. Exact for polynomials of degree `< 2 * heights` in `z` and
/// trigonometric polynomials of degree `< azimuths` in the azimuth.
pub fn gauss_product_nodes<T: Real>(heights: usize, azimuths: usize) -> (Vec<BPoint<T>>, Vec<T>) {
    let (zs, zw) = gauss_legendre(heights);
    let mut nodes = Vec::with_capacity(heights * azimuths);
    let mut weights = Vec::with_capacity(heights * azimuths);
    for (z, w) in zs.iter().zip(&zw) {
        let rho = (1.0 - z * z).sqrt();
        for k in 0..azimuths {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / azimuths as f64;
            nodes.push(BPoint::renormalized(Vector::from_f64(&[rho * phi.cos(), rho * phi.sin(), *z])));
            weights.push(T::lit(0.5 * w / azimuths as f64));
        }
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}
