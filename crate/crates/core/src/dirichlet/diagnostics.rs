//! Monte Carlo estimates of the direction sets at the point where the
//! harmonic map is farthest from the extension.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{DirichletError, DirichletSolution};
use crate::barycentric::{Extension, ExtensionOptions};
use crate::boundary_maps::SphereMap;
use crate::hyperbolic::{dist, exp_map, log_map, BPoint, HPoint, Tangent};
use crate::linalg::Vector;

/// Displacements below this make the sets degenerate; diagnostics are
/// skipped.
pub const SKIP_BELOW: f64 = 0.1;

/// Angle at the vertex opposite side `a` of a hyperbolic triangle with sides
/// `a`, `b`, `c`.
pub fn triangle_angle(a: f64, b: f64, c: f64) -> f64 {
    ((b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh())).clamp(-1.0, 1.0).acos()
}

/// `4 exp(-(b + c - a) / 4)`, an upper bound for [`triangle_angle`].
pub fn angle_bound(a: f64, b: f64, c: f64) -> f64 {
    4.0 * (-0.25 * (-a + b + c)).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticOptions {
    /// Bound on the first and second derivatives of the extension.
    pub c: f64,
    /// Linear rate and offset of the radial lower bound defining `Q_x`.
    pub c0: f64,
    /// Radius from which the radial lower bound is required.
    pub r0: f64,
    /// The radial bound is sampled on `[r0, r0 + horizon]`.
    pub horizon: f64,
    pub directions: usize,
    /// Samples of `t in [0, r_R]` for the set `V_R`.
    pub radial_samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub extension: ExtensionOptions<f64>,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            c: 2.0,
            c0: 0.5,
            r0: 1.0,
            horizon: 4.0,
            directions: 10_000,
            radial_samples: 16,
            seed: 0,
            extension: ExtensionOptions::default().with_size(512),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofDiagnostics {
    pub rho_r: f64,
    pub r_r: f64,
    pub x_r: Vec<f64>,
    pub skipped: bool,
    pub directions: usize,
    pub u_fraction: f64,
    pub v_fraction: f64,
    pub q_fraction: f64,
    /// Fraction of directions in all three sets.
    pub joint_fraction: f64,
    /// `1 / (3 c^2)`.
    pub u_lower_bound: f64,
    /// `1 - 2^12 (n + 1) c r_R^2 / rho_R`.
    pub v_lower_bound: f64,
    /// Largest angle at `F(x_R)` between the directions to `h(x_R)` and to
    /// `F(exp(r_R v))` over the joint set.
    pub max_angle: Option<f64>,
    pub angle_bound: f64,
    pub angle_violations: usize,
}

impl ProofDiagnostics {
    fn skipped(rho_r: f64, x_r: Vec<f64>) -> Self {
        Self {
            rho_r,
            r_r: rho_r.cbrt(),
            x_r,
            skipped: true,
            directions: 0,
            u_fraction: f64::NAN,
            v_fraction: f64::NAN,
            q_fraction: f64::NAN,
            joint_fraction: f64::NAN,
            u_lower_bound: f64::NAN,
            v_lower_bound: f64::NAN,
            max_angle: None,
            angle_bound: f64::NAN,
            angle_violations: 0,
        }
    }
}

fn unit_angle(a: &Vector<f64>, b: &Vector<f64>) -> f64 {
    2.0 * (*a - *b).norm().atan2((*a + *b).norm())
}

/// Classifies random unit directions at the vertex `x_R` attaining `rho_R`,
/// with `r_R = rho_R^(1/3)`. Outside the meshed ball `h` is continued by the
/// extension, which it equals on the boundary sphere.
pub fn proof_diagnostics(
    solution: &DirichletSolution<'_, f64>,
    f: &SphereMap<f64>,
    opts: &DiagnosticOptions,
) -> Result<ProofDiagnostics, DirichletError> {
    let report = &solution.report;
    let mesh = solution.map.mesh();
    let x_r = mesh.vertices()[report.rho_vertex];
    let rho_r = report.rho_r;
    if rho_r < SKIP_BELOW {
        return Ok(ProofDiagnostics::skipped(rho_r, x_r.coords().to_f64_vec()));
    }
    let r_r = rho_r.cbrt();
    let dim = mesh.dim();
    let extension = Extension::new(f.clone(), opts.extension.clone())?;
    let y_r = solution.reference[report.rho_vertex];
    let h_dir = log_map(&y_r, solution.map.value(report.rho_vertex)).frame().normalized().unwrap_or(Vector::basis(dim, 0));
    let radius = mesh.radius();
    let h_at = |p: &HPoint<f64>| -> Result<HPoint<f64>, DirichletError> {
        if p.radius() >= radius {
            Ok(extension.value(p)?)
        } else {
            solution.map.value_at(p)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dirs: Vec<Vector<f64>> = (0..opts.directions).map(|_| *BPoint::random(dim, &mut rng).as_vector()).collect();
    let q_samples = 4;
    let classified: Vec<(bool, bool, bool, Option<f64>)> = dirs
        .par_iter()
        .map(|v| {
            let along = |t: f64| exp_map(&x_r, &Tangent(*v * t));
            let tip = along(r_r);
            let in_u = dist(&y_r, &h_at(&tip)?) >= rho_r - r_r / (2.0 * opts.c);
            let mut in_v = true;
            for k in 0..=opts.radial_samples {
                let t = r_r * k as f64 / opts.radial_samples as f64;
                if dist(&y_r, &h_at(&along(t))?) < 0.5 * rho_r {
                    in_v = false;
                    break;
                }
            }
            let mut in_q = true;
            for k in 0..q_samples {
                let r = opts.r0 + opts.horizon * k as f64 / (q_samples - 1) as f64;
                if dist(&y_r, &extension.value(&along(r))?) < opts.c0 * r - opts.c0 {
                    in_q = false;
                    break;
                }
            }
            let angle = if in_u && in_v && in_q {
                let f_dir = log_map(&y_r, &extension.value(&tip)?).frame().normalized();
                f_dir.map(|d| unit_angle(&h_dir, &d))
            } else {
                None
            };
            Ok((in_u, in_v, in_q, angle))
        })
        .collect::<Result<_, DirichletError>>()?;
    let count = dirs.len() as f64;
    let frac = |pick: &dyn Fn(&(bool, bool, bool, Option<f64>)) -> bool| classified.iter().filter(|c| pick(c)).count() as f64 / count;
    let bound = 8.0 * rho_r * rho_r / (rho_r / 4.0).sinh() + 4.0 * (-0.25 * (r_r / (2.0 * opts.c) - opts.c0)).exp();
    let angles: Vec<f64> = classified.iter().filter_map(|c| c.3).collect();
    Ok(ProofDiagnostics {
        rho_r,
        r_r,
        x_r: x_r.coords().to_f64_vec(),
        skipped: false,
        directions: dirs.len(),
        u_fraction: frac(&|c| c.0),
        v_fraction: frac(&|c| c.1),
        q_fraction: frac(&|c| c.2),
        joint_fraction: frac(&|c| c.0 && c.1 && c.2),
        u_lower_bound: 1.0 / (3.0 * opts.c * opts.c),
        v_lower_bound: 1.0 - 4096.0 * dim as f64 * opts.c * r_r * r_r / rho_r,
        max_angle: angles.iter().copied().reduce(f64::max),
        angle_bound: bound,
        angle_violations: angles.iter().filter(|a| **a > bound).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{build_mesh, solve_dirichlet, DirichletOptions, EdgeWeights};
    use rand::Rng;

    /// Half-angle form: `sin^2(A/2) = sinh((a-b+c)/2) sinh((a+b-c)/2) / (sinh b sinh c)`.
    fn half_angle(a: f64, b: f64, c: f64) -> f64 {
        let s = ((0.5 * (a - b + c)).sinh() * (0.5 * (a + b - c)).sinh() / (b.sinh() * c.sinh())).max(0.0);
        2.0 * s.sqrt().min(1.0).asin()
    }

    #[test]
    fn random_triangles_satisfy_the_angle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 10_000 {
            let dim = if checked % 2 == 0 { 2 } else { 3 };
            let reach = rng.random_range(0.5..6.0);
            let p: Vec<HPoint<f64>> = (0..3).map(|_| HPoint::random(dim, reach, &mut rng)).collect();
            let (a, b, c) = (dist(&p[1], &p[2]), dist(&p[2], &p[0]), dist(&p[0], &p[1]));
            if a.min(b).min(c) < 0.1 {
                continue;
            }
            let u = log_map(&p[0], &p[1]).frame().normalized().unwrap();
            let w = log_map(&p[0], &p[2]).frame().normalized().unwrap();
            let measured = unit_angle(&u, &w);
            assert!((measured - half_angle(a, b, c)).abs() < 1e-6, "{a} {b} {c}");
            assert!((triangle_angle(a, b, c) - half_angle(a, b, c)).abs() < 1e-6);
            assert!(measured <= angle_bound(a, b, c), "{a} {b} {c}: {measured}");
            checked += 1;
        }
    }

    #[test]
    fn small_displacement_skips() {
        let mesh = build_mesh::<f64>(1, 1.0, 0.25, EdgeWeights::Cotangent).unwrap();
        let f = SphereMap::identity(1).unwrap();
        let mut opts = DirichletOptions::default();
        opts.extension = opts.extension.with_size(256);
        let solution = solve_dirichlet(&f, &mesh, &opts).unwrap();
        let diag = proof_diagnostics(&solution, &f, &DiagnosticOptions::default()).unwrap();
        assert!(diag.skipped && diag.rho_r < SKIP_BELOW);
    }
}
