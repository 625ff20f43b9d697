//! Finite-difference derivatives of boundary maps, sampled distortion and
//! degree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{MapError, SphereMap, BRANCH_GUARD};
use crate::hyperbolic::BPoint;
use crate::linalg::Matrix;
use crate::sphere::{circle_nodes, gauss_product_nodes, sphere_exp, sphere_log, tangent_frame};
use crate::Real;

/// Derivative of `f` at `theta` by central differences of step `h` along an
/// oriented orthonormal frame of `T_theta S^n`, expressed in the oriented
/// frame at `f(theta)`.
pub fn sample_derivative<T: Real>(f: &SphereMap<T>, theta: &BPoint<T>, h: T) -> Result<Matrix<T>, MapError> {
    let hf = h.to_f64_lossy();
    if !(1e-7..=1e-3).contains(&hf) {
        return Err(MapError::StepOutOfRange(hf));
    }
    if theta.dim() != f.n() + 1 {
        return Err(MapError::DimensionMismatch { expected: f.n(), found: theta.dim() - 1 });
    }
    let guard = T::lit(BRANCH_GUARD).max(T::lit(10.0) * h);
    if f.near_singular(theta, guard) {
        return Err(MapError::NearSingular { point: theta.as_vector().to_f64_vec() });
    }
    Ok(derivative_unchecked(f, theta, h))
}

fn derivative_unchecked<T: Real>(f: &SphereMap<T>, theta: &BPoint<T>, h: T) -> Matrix<T> {
    let n = f.n();
    let image = f.apply(theta);
    let src = tangent_frame(theta);
    let dst = tangent_frame(&image);
    let mut jac = Matrix::zeros(n);
    for (k, e) in src.iter().enumerate() {
        let plus = sphere_log(&image, &f.apply(&sphere_exp(theta, &(*e * h))));
        let minus = sphere_log(&image, &f.apply(&sphere_exp(theta, &(*e * -h))));
        let col = (plus - minus) * (T::one() / (T::two() * h));
        for (j, d) in dst.iter().enumerate() {
            jac[(j, k)] = d.dot(&col);
        }
    }
    jac
}

/// Sampled outer, inner and maximal distortion.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DistortionEstimate {
    pub k_outer: f64,
    pub k_inner: f64,
    pub k: f64,
    pub used: usize,
    /// Samples skipped near singular points or with degenerate Jacobian.
    pub excluded: usize,
}

/// Maxima of `|Df|^n / det Df` and `det Df / s_min^n` over `samples` random
/// points. The sample stream depends only on `seed`, so runs with more
/// samples see a superset of the points.
pub fn estimate_distortion<T: Real>(f: &SphereMap<T>, samples: usize, seed: u64) -> Result<DistortionEstimate, MapError> {
    if samples < 100 {
        return Err(MapError::TooFewSamples(samples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<BPoint<T>> = (0..samples).map(|_| BPoint::random(f.n() + 1, &mut rng)).collect();
    let h = T::lit(1e-5);
    let n = f.n() as i32;
    let ratios: Vec<Option<(f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let jac = sample_derivative(f, p, h).ok()?;
            let det = jac.determinant().to_f64_lossy();
            let sv = jac.singular_values();
            let smax = sv.last()?.to_f64_lossy();
            let smin = sv.first()?.to_f64_lossy();
            if det <= 1e-6 * smax.powi(n) || smin <= 0.0 {
                return None;
            }
            Some((smax.powi(n) / det, det / smin.powi(n)))
        })
        .collect();
    let used: Vec<(f64, f64)> = ratios.iter().flatten().copied().collect();
    let k_outer = used.iter().map(|r| r.0).fold(1.0, f64::max);
    let k_inner = used.iter().map(|r| r.1).fold(1.0, f64::max);
    Ok(DistortionEstimate {
        k_outer,
        k_inner,
        k: k_outer.max(k_inner),
        used: used.len(),
        excluded: samples - used.len(),
    })
}

/// `∫ det Df dvol` over the normalized round measure.
pub fn estimate_degree<T: Real>(f: &SphereMap<T>) -> Result<T, MapError> {
    let (nodes, weights): (Vec<BPoint<T>>, Vec<T>) = match f.n() {
        1 => {
            let m = 4096;
            (circle_nodes(m), vec![T::one() / T::lit(m as f64); m])
        }
        _ => gauss_product_nodes(64, 128),
    };
    let h = T::lit(1e-5);
    let guard = T::lit(BRANCH_GUARD);
    let total: f64 = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(p, w)| {
            if f.near_singular(p, guard) {
                0.0
            } else {
                (*w * derivative_unchecked(f, p, h).determinant()).to_f64_lossy()
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let residual = (total - total.round()).abs();
    if residual > 0.2 {
        return Err(MapError::DegreeResidual { estimate: total, residual });
    }
    Ok(T::lit(total))
}
