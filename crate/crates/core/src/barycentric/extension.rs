//! The barycentric extension `x -> BCG(f_* vol_x)` and its derivatives.

use serde::{Deserialize, Serialize};

use super::functional::{barycenter_from, initial_guess, BarycenterResult};
use super::measure::{map_nodes, quadrature_with, DiscreteMeasure, QuadratureRule};
use super::{BarycenterError, SolverOptions};
use crate::boundary_maps::SphereMap;
use crate::hyperbolic::{
    busemann, direction_to_boundary, dist, transvect_boundary, BPoint, DensityExponent, HPoint, MobiusIsometry,
};
use crate::linalg::{Matrix, Vector};
use crate::sphere::{circle_nodes, fibonacci_nodes};
use crate::Real;

/// How the visual measure at `x` is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionScheme {
    /// Nodes `T_x(theta_i)` carrying the base weights: the quadrature is
    /// moved along with `x`, so it resolves `vol_x` equally well at every
    /// point.
    #[default]
    Transported,
    /// Fixed nodes with weights multiplied by the density of `vol_x`.
    Reweighted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionOptions<T> {
    pub quadrature_size: usize,
    pub rule: QuadratureRule,
    pub scheme: ExtensionScheme,
    pub exponent: DensityExponent,
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for ExtensionOptions<T> {
    fn default() -> Self {
        Self {
            quadrature_size: 2048,
            rule: QuadratureRule::GaussProduct,
            scheme: ExtensionScheme::Transported,
            exponent: DensityExponent::Poisson,
            solver: SolverOptions::default(),
        }
    }
}

impl<T: Real> ExtensionOptions<T> {
    pub fn with_size(mut self, quadrature_size: usize) -> Self {
        self.quadrature_size = quadrature_size;
        self
    }
}

/// One evaluation of the extension.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionEvaluation<T> {
    pub input: HPoint<T>,
    pub value: HPoint<T>,
    /// Frame-coordinate differential at `input`.
    pub jacobian: Option<Matrix<T>>,
    pub quadrature_size: usize,
    pub gradient_norm: T,
    pub iterations: usize,
    /// Distance to the value computed with four times as many nodes.
    pub refinement: Option<T>,
}

/// The discretized measure `f_* vol_x` together with, for each atom, the
/// direction at `x` of its preimage.
struct VisualData<T> {
    measure: DiscreteMeasure<T>,
    sources: Vec<Vector<T>>,
}

/// A boundary map bundled with a base quadrature, ready to be extended.
#[derive(Clone, Debug)]
pub struct Extension<T> {
    map: SphereMap<T>,
    base: DiscreteMeasure<T>,
    opts: ExtensionOptions<T>,
}

impl<T: Real> Extension<T> {
    pub fn new(map: SphereMap<T>, opts: ExtensionOptions<T>) -> Result<Self, BarycenterError> {
        let base = quadrature_with(map.n(), opts.quadrature_size, opts.rule)?;
        Ok(Self { map, base, opts })
    }

    pub fn map(&self) -> &SphereMap<T> {
        &self.map
    }

    pub fn options(&self) -> &ExtensionOptions<T> {
        &self.opts
    }

    /// Number of atoms in the base quadrature.
    pub fn quadrature_size(&self) -> usize {
        self.base.len()
    }

    fn check(&self, x: &HPoint<T>) -> Result<(), BarycenterError> {
        if x.dim() != self.map.n() + 1 {
            return Err(BarycenterError::DimensionMismatch { expected: self.map.n() + 1, found: x.dim() });
        }
        Ok(())
    }

    fn visual_data(&self, x: &HPoint<T>) -> Result<VisualData<T>, BarycenterError> {
        let n = self.map.n();
        let e = T::lit(self.opts.exponent.value(n));
        let (nodes, sources, logs): (Vec<BPoint<T>>, Vec<Vector<T>>, Vec<T>) = match self.opts.scheme {
            ExtensionScheme::Transported => {
                // vol_x is the image of vol_o under T_x, and the direction at x
                // of T_x(theta) is theta itself; only a non-standard exponent
                // leaves a residual density.
                let excess = e - T::lit(n as f64);
                let moved = map_nodes(self.base.nodes(), |p| {
                    let q = BPoint::renormalized(transvect_boundary(x.coords(), p.as_vector()));
                    let log = if excess == T::zero() { T::zero() } else { -excess * busemann(x, &q) };
                    (q, *p.as_vector(), log)
                });
                unzip3(moved)
            }
            ExtensionScheme::Reweighted => {
                let data = map_nodes(self.base.nodes(), |p| (*p, *direction_to_boundary(x, p).frame(), -e * busemann(x, p)));
                unzip3(data)
            }
        };
        let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
        let weights = logs.iter().zip(self.base.weights()).map(|(l, w)| *w * (*l - top).exp()).collect();
        let images = map_nodes(&nodes, |p| self.map.apply(p));
        Ok(VisualData { measure: DiscreteMeasure::normalized(images, weights)?, sources })
    }

    fn solve(&self, x: &HPoint<T>, start: Option<HPoint<T>>) -> Result<(VisualData<T>, BarycenterResult<T>), BarycenterError> {
        self.check(x)?;
        let annotate = |e: BarycenterError| BarycenterError::AtPoint { point: x.coords().to_f64_vec(), source: Box::new(e) };
        let data = self.visual_data(x).map_err(annotate)?;
        let start = start.unwrap_or_else(|| initial_guess(&data.measure));
        let result = barycenter_from(&data.measure, start, &self.opts.solver).map_err(annotate)?;
        Ok((data, result))
    }

    /// `F_f(x)`.
    pub fn value(&self, x: &HPoint<T>) -> Result<HPoint<T>, BarycenterError> {
        Ok(self.solve(x, None)?.1.point)
    }

    /// `F_f(x)` with the Newton iteration started at `guess`.
    pub fn value_near(&self, x: &HPoint<T>, guess: &HPoint<T>) -> Result<HPoint<T>, BarycenterError> {
        Ok(self.solve(x, Some(*guess))?.1.point)
    }

    /// Value and differential at `x`.
    pub fn evaluate(&self, x: &HPoint<T>) -> Result<ExtensionEvaluation<T>, BarycenterError> {
        let (data, result) = self.solve(x, None)?;
        let jacobian = self.implicit_jacobian(&data, &result.point)?;
        Ok(ExtensionEvaluation {
            input: *x,
            value: result.point,
            jacobian: Some(jacobian),
            quadrature_size: self.base.len(),
            gradient_norm: result.gradient_norm,
            iterations: result.iterations,
            refinement: None,
        })
    }

    /// The differential from the implicit function theorem applied to
    /// `G(x, y) = sum W_i(x) n_{eta_i}(y)`: `DF = H^{-1} dG/dx` with
    /// `H = I - sum W_i psi_i psi_i^T` and `dG/dx` obtained by
    /// differentiating the density weights, `d log W_i = E <nu_i - nu_bar, .>`.
    fn implicit_jacobian(&self, data: &VisualData<T>, y: &HPoint<T>) -> Result<Matrix<T>, BarycenterError> {
        let dim = y.dim();
        let e = T::lit(self.opts.exponent.value(dim - 1));
        let weights = data.measure.weights();
        let psis = map_nodes(data.measure.nodes(), |p| *direction_to_boundary(y, p).frame());
        let mut mean_source = Vector::zeros(dim);
        for (nu, w) in data.sources.iter().zip(weights) {
            mean_source += *nu * *w;
        }
        let mut hessian = Matrix::identity(dim);
        let mut mixed = Matrix::zeros(dim);
        for ((psi, nu), w) in psis.iter().zip(&data.sources).zip(weights) {
            hessian = hessian - psi.outer(psi).scale(*w);
            mixed = mixed + psi.outer(&(*nu - mean_source)).scale(*w * e);
        }
        let min_eig = hessian.symmetric_eigenvalues()[0];
        if !(min_eig > T::zero()) {
            return Err(BarycenterError::SingularHessian(min_eig.to_f64_lossy()));
        }
        hessian.solve_matrix(&mixed).ok_or(BarycenterError::SingularHessian(min_eig.to_f64_lossy()))
    }

    pub fn jacobian(&self, x: &HPoint<T>) -> Result<Matrix<T>, BarycenterError> {
        let (data, result) = self.solve(x, None)?;
        self.implicit_jacobian(&data, &result.point)
    }

    /// Operator norm of the second covariant derivative at `x`, by central
    /// differences of the differential of `T_{-F(x)} o f o T_x` at distance
    /// `step` from the origin. Frames at points on geodesics from the origin
    /// are parallel along them, so the differences need no transport.
    pub fn second_derivative_norm(&self, x: &HPoint<T>, step: T) -> Result<T, BarycenterError> {
        let y = self.value(x)?;
        let recentred = SphereMap::compose(
            SphereMap::mobius(MobiusIsometry::transvection(HPoint::saturating(-*y.coords()))),
            SphereMap::compose(self.map.clone(), SphereMap::mobius(MobiusIsometry::transvection(*x)))?,
        )?;
        let local = Self { map: recentred, base: self.base.clone(), opts: self.opts.clone() };
        let dim = x.dim();
        let offset = (step * T::half()).tanh();
        let mut slices = Vec::with_capacity(dim);
        for k in 0..dim {
            let e = Vector::basis(dim, k);
            let plus = local.jacobian(&HPoint::saturating(e * offset))?;
            let minus = local.jacobian(&HPoint::saturating(e * -offset))?;
            slices.push((plus - minus).scale(T::one() / (T::two() * step)));
        }
        let directions: Vec<Vector<T>> = match dim {
            2 => circle_nodes::<T>(360).iter().map(|p| *p.as_vector()).collect(),
            _ => fibonacci_nodes::<T>(2000).iter().map(|p| *p.as_vector()).collect(),
        };
        let norm = directions
            .iter()
            .map(|v| {
                let mut m = Matrix::zeros(dim);
                for (k, slice) in slices.iter().enumerate() {
                    m = m + slice.scale(v[k]);
                }
                m.operator_norm()
            })
            .fold(T::zero(), T::max);
        Ok(norm)
    }

    /// Distance between the values at this quadrature size and at four
    /// times it.
    pub fn refinement(&self, x: &HPoint<T>) -> Result<T, BarycenterError> {
        let finer = Self::new(self.map.clone(), self.opts.clone().with_size(4 * self.opts.quadrature_size))?;
        let coarse = self.value(x)?;
        let fine = finer.value_near(x, &coarse)?;
        Ok(dist(&coarse, &fine))
    }
}

fn unzip3<A, B, C>(items: Vec<(A, B, C)>) -> (Vec<A>, Vec<B>, Vec<C>) {
    let mut a = Vec::with_capacity(items.len());
    let mut b = Vec::with_capacity(items.len());
    let mut c = Vec::with_capacity(items.len());
    for (x, y, z) in items {
        a.push(x);
        b.push(y);
        c.push(z);
    }
    (a, b, c)
}

/// Value, differential and refinement estimate of the extension of `f` at
/// `x` with `size` quadrature nodes and default options otherwise.
pub fn extend<T: Real>(f: &SphereMap<T>, x: &HPoint<T>, size: usize) -> Result<ExtensionEvaluation<T>, BarycenterError> {
    let ext = Extension::new(f.clone(), ExtensionOptions::default().with_size(size))?;
    let mut eval = ext.evaluate(x)?;
    eval.refinement = Some(ext.refinement(x)?);
    Ok(eval)
}

pub fn extension_jacobian<T: Real>(f: &SphereMap<T>, x: &HPoint<T>, size: usize) -> Result<Matrix<T>, BarycenterError> {
    Extension::new(f.clone(), ExtensionOptions::default().with_size(size))?.jacobian(x)
}

/// Step used by [`second_derivative_norm`].
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-2;

pub fn second_derivative_norm<T: Real>(f: &SphereMap<T>, x: &HPoint<T>, size: usize) -> Result<T, BarycenterError> {
    Extension::new(f.clone(), ExtensionOptions::default().with_size(size))?
        .second_derivative_norm(x, T::lit(SECOND_DERIVATIVE_STEP))
}

/// Post-composes `f` with the transvection `h` taking `F_f(o)` to `o`, so the
/// extension of `h o f` fixes the origin.
pub fn normalize<T: Real>(
    f: &SphereMap<T>,
    opts: &ExtensionOptions<T>,
) -> Result<(SphereMap<T>, MobiusIsometry<T>), BarycenterError> {
    let ext = Extension::new(f.clone(), opts.clone())?;
    let y = ext.value(&HPoint::origin(f.n() + 1))?;
    let h = MobiusIsometry::transvection(HPoint::saturating(-*y.coords()));
    let label = format!("normalized({})", f.label());
    let balanced = SphereMap::compose(SphereMap::mobius(h.clone()), f.clone())?.with_label(label);
    Ok((balanced, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_maps::{Lift, QsCovering};
    use crate::hyperbolic::{exp_map, exp_ray, visual_angle, Tangent};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn north() -> BPoint<f64> {
        BPoint::from_f64(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn isometry_traces_extend_to_the_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 3] {
            let g = MobiusIsometry::<f64>::random(dim, 2.0, &mut rng);
            let f = SphereMap::mobius(g.clone());
            let ext = Extension::new(f, ExtensionOptions::default()).unwrap();
            for _ in 0..5 {
                let x = HPoint::random(dim, 4.0, &mut rng);
                let eval = ext.evaluate(&x).unwrap();
                assert!(dist(&eval.value, &g.apply(&x)) < 1e-5);
                let j = eval.jacobian.unwrap();
                let sv = j.singular_values();
                assert!((sv[0] - 1.0).abs() < 1e-4 && (sv[dim - 1] - 1.0).abs() < 1e-4, "{sv:?}");
            }
        }
    }

    #[test]
    fn both_schemes_agree_near_the_origin() {
        let f = SphereMap::compose(SphereMap::power(2, 2).unwrap(), SphereMap::radial_stretch(1.5, north()).unwrap()).unwrap();
        let x = HPoint::from_f64(&[0.2, 0.1, -0.1]).unwrap();
        let a = Extension::new(f.clone(), ExtensionOptions::default().with_size(8192)).unwrap();
        let mut opts = ExtensionOptions::default().with_size(8192);
        opts.scheme = ExtensionScheme::Reweighted;
        let b = Extension::new(f, opts).unwrap();
        assert!(dist(&a.value(&x).unwrap(), &b.value(&x).unwrap()) < 1e-3);
    }

    #[test]
    fn powers_fix_the_origin() {
        for d in 1..=4 {
            let f = SphereMap::<f64>::power(1, d).unwrap();
            let eval = extend(&f, &HPoint::origin(2), 256).unwrap();
            assert!(eval.value.coords().norm() < 1e-8);
        }
    }

    #[test]
    fn boundary_values_are_approached_radially() {
        let covering = QsCovering::new(Lift::piecewise_power(2.0).unwrap(), 2).unwrap();
        let f = SphereMap::<f64>::qs_covering(covering);
        let ext = Extension::new(f.clone(), ExtensionOptions::default()).unwrap();
        let theta = BPoint::from_angle(0.7);
        let o = HPoint::origin(2);
        let start = direction_to_boundary(&o, &theta);
        let mut last = f64::INFINITY;
        for t in [2.0, 4.0, 6.0] {
            let y = ext.value(&exp_ray(&o, &start, t)).unwrap();
            let limit = BPoint::new(*y.coords()).unwrap();
            let gap = visual_angle(&o, &limit, &f.apply(&theta));
            assert!(gap < last, "{t}: {gap}");
            last = gap;
        }
    }

    #[test]
    fn implicit_jacobian_matches_finite_differences() {
        let f = SphereMap::compose(SphereMap::winding(2).unwrap(), SphereMap::radial_stretch(1.3, north()).unwrap()).unwrap();
        let ext = Extension::new(f, ExtensionOptions::default().with_size(4096)).unwrap();
        // Frames along geodesics from the origin are parallel, so compare at
        // a point whose image is also the origin after recentring.
        let (balanced, _) = normalize(ext.map(), ext.options()).unwrap();
        let ext = Extension::new(balanced, ExtensionOptions::default().with_size(4096)).unwrap();
        let o = HPoint::origin(3);
        let j = ext.jacobian(&o).unwrap();
        let h = 1e-4;
        for k in 0..3 {
            let e = Vector::basis(3, k);
            let plus = ext.value(&exp_map(&o, &Tangent(e * h))).unwrap();
            let minus = ext.value(&exp_map(&o, &Tangent(e * -h))).unwrap();
            let col = (*plus.coords() - *minus.coords()) * (1.0 / h);
            for r in 0..3 {
                assert!((col[r] - j[(r, k)]).abs() < 1e-4, "{k},{r}: {} vs {}", col[r], j[(r, k)]);
            }
        }
    }

    #[test]
    fn symmetric_maps_have_equivariant_differentials() {
        // z^3 o R_phi = R_{3 phi} o z^3 for rotations about the pole, hence
        // J R_phi = R_{3 phi} J at the fixed point o.
        let f = SphereMap::<f64>::power(2, 3).unwrap();
        let j = extension_jacobian(&f, &HPoint::origin(3), 4096).unwrap();
        let phi = 0.37;
        let rot = |a: f64| MobiusIsometry::axis_rotation(&north(), a).rotation_matrix().clone();
        let gap = (j.clone() * rot(phi) - rot(3.0 * phi) * j.clone()).max_abs();
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn isometries_have_vanishing_second_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = MobiusIsometry::random(2, 1.5, &mut rng);
        let f = SphereMap::mobius(g);
        let x = HPoint::from_f64(&[0.5, -0.2]).unwrap();
        assert!(second_derivative_norm(&f, &x, 2048).unwrap() < 1e-3);
    }

    #[test]
    fn normalization_balances_the_map() {
        let t = HPoint::<f64>::from_f64(&[0.3, -0.4, 0.2]).unwrap();
        let g = MobiusIsometry::transvection(t);
        let (balanced, h) = normalize(&SphereMap::mobius(g.clone()), &ExtensionOptions::default()).unwrap();
        assert!((h.transvection_target().coords().clone() + *t.coords()).max_abs() < 1e-6);
        let ext = Extension::new(balanced, ExtensionOptions::default()).unwrap();
        assert!(ext.value(&HPoint::origin(3)).unwrap().coords().norm() < 1e-7);
        let (_, h) = normalize(&SphereMap::<f64>::power(2, 2).unwrap(), &ExtensionOptions::default()).unwrap();
        assert!(h.transvection_target().coords().norm() < 1e-8);
    }

    #[test]
    fn extension_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = SphereMap::compose(SphereMap::power(2, 2).unwrap(), SphereMap::radial_stretch(1.4, north()).unwrap()).unwrap();
        let opts = ExtensionOptions::default().with_size(4096);
        let base = Extension::new(f.clone(), opts.clone()).unwrap();
        for _ in 0..3 {
            let h = MobiusIsometry::random(3, 1.0, &mut rng);
            let g = MobiusIsometry::random(3, 1.0, &mut rng);
            let conj = SphereMap::compose(SphereMap::mobius(h.clone()), SphereMap::compose(f.clone(), SphereMap::mobius(g.clone())).unwrap()).unwrap();
            let x = HPoint::<f64>::random(3, 1.0, &mut rng);
            let lhs = Extension::new(conj, opts.clone()).unwrap().value(&x).unwrap();
            let rhs = h.apply(&base.value(&g.apply(&x)).unwrap());
            assert!(dist(&lhs, &rhs) < 1e-6, "{}", dist(&lhs, &rhs));
        }
    }
}
