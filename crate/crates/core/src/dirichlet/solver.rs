//! Energy-decreasing relaxation towards the discrete harmonic map.

use rayon::prelude::*;
use serde::Serialize;

use super::{BallMesh, DirichletError};
use crate::barycentric::{karcher_mean, Extension, ExtensionOptions, SolverOptions};
use crate::boundary_maps::SphereMap;
use crate::hyperbolic::{dist, log_map, HPoint};
use crate::linalg::Vector;
use crate::Real;

const PARALLEL_MIN: usize = 256;

#[derive(Clone, Debug)]
pub struct DirichletOptions<T> {
    /// Stop once no vertex moves farther than this in a sweep.
    pub tol: T,
    pub max_sweeps: usize,
    pub extension: ExtensionOptions<T>,
    pub karcher: SolverOptions<T>,
}

impl<T: Real> Default for DirichletOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8).max(T::solver_tolerance()),
            max_sweeps: 20_000,
            extension: ExtensionOptions::default(),
            karcher: SolverOptions::default(),
        }
    }
}

/// Values at the vertices of a mesh.
#[derive(Clone, Debug)]
pub struct DiscreteMap<'m, T> {
    mesh: &'m BallMesh<T>,
    values: Vec<HPoint<T>>,
}

impl<'m, T: Real> DiscreteMap<'m, T> {
    pub fn new(mesh: &'m BallMesh<T>, values: Vec<HPoint<T>>) -> Self {
        assert_eq!(mesh.len(), values.len(), "one value per vertex");
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &'m BallMesh<T> {
        self.mesh
    }

    pub fn values(&self) -> &[HPoint<T>] {
        &self.values
    }

    pub fn value(&self, v: usize) -> &HPoint<T> {
        &self.values[v]
    }

    /// `1/2 sum_edges w_ij d(h_i, h_j)^2`.
    pub fn energy(&self) -> T {
        self.mesh.edges().map(|(i, j, w)| T::half() * w * dist(&self.values[i], &self.values[j]).powi(2)).sum()
    }

    /// `|sum_j w_ij log_{h_i}(h_j)| / sum_j w_ij` at an interior vertex.
    pub fn balance(&self, v: usize) -> T {
        let nb = self.mesh.neighbors(v);
        let total: T = nb.iter().map(|(_, w)| *w).sum();
        let pull = nb.iter().fold(Vector::zeros(self.values[v].dim()), |acc, (u, w)| {
            acc + *log_map(&self.values[v], &self.values[*u]).frame() * *w
        });
        pull.norm() / total
    }

    pub fn balance_residual(&self) -> T {
        (0..self.mesh.len())
            .filter(|v| !self.mesh.is_boundary(*v))
            .map(|v| self.balance(v))
            .fold(T::zero(), T::max)
    }

    /// Value at an arbitrary point of the ball: the Karcher mean of the
    /// values at nearby vertices, weighted by inverse squared distance.
    pub fn value_at(&self, p: &HPoint<T>) -> Result<HPoint<T>, DirichletError> {
        let near = self.mesh.nearby(p, 4);
        let mut points = Vec::with_capacity(near.len());
        let mut weights = Vec::with_capacity(near.len());
        for v in near {
            let d = dist(p, &self.mesh.vertices()[v]);
            if d < T::lit(1e-12) {
                return Ok(self.values[v]);
            }
            points.push(self.values[v]);
            weights.push(T::one() / (d * d));
        }
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w = *w / total);
        karcher_mean(&points, &weights, None, &SolverOptions::default()).map_err(|source| DirichletError::Update { vertex: usize::MAX, source })
    }

    pub fn into_values(self) -> Vec<HPoint<T>> {
        self.values
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    /// Energy before the first sweep and after each sweep.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub max_update: f64,
    pub converged: bool,
    pub balance_residual: f64,
    pub rho_r: f64,
    /// Vertex where `rho_r` is attained.
    pub rho_vertex: usize,
}

impl FlowReport {
    pub fn check(&self) -> Result<(), DirichletError> {
        if self.converged {
            Ok(())
        } else {
            Err(DirichletError::NotConverged { sweeps: self.iterations, max_update: self.max_update })
        }
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.energies.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

#[derive(Clone, Debug)]
pub struct DirichletSolution<'m, T> {
    pub map: DiscreteMap<'m, T>,
    /// The extension evaluated at every vertex.
    pub reference: Vec<HPoint<T>>,
    pub report: FlowReport,
}

#[derive(Clone, Debug)]
pub struct Relaxation<'m, T> {
    pub map: DiscreteMap<'m, T>,
    pub energies: Vec<f64>,
    pub sweeps: usize,
    pub max_update: T,
    pub converged: bool,
}

/// Colored Gauss-Seidel sweeps from `initial`, whose boundary entries are
/// kept. Each interior vertex moves to the weighted Karcher mean of its
/// neighbors, which minimizes the energy in that vertex, so the energy never
/// increases.
pub fn relax<'m, T: Real>(
    mesh: &'m BallMesh<T>,
    initial: Vec<HPoint<T>>,
    opts: &DirichletOptions<T>,
) -> Result<Relaxation<'m, T>, DirichletError> {
    let mut map = DiscreteMap::new(mesh, initial);
    let classes: Vec<Vec<usize>> = mesh
        .color_classes()
        .into_iter()
        .map(|class| class.into_iter().filter(|v| !mesh.is_boundary(*v)).collect::<Vec<_>>())
        .filter(|class| !class.is_empty())
        .collect();
    let mut energies = vec![map.energy().to_f64_lossy()];
    let mut movement = T::infinity();
    let update = |values: &[HPoint<T>], v: usize| -> Result<HPoint<T>, DirichletError> {
        let nb = mesh.neighbors(v);
        let total: T = nb.iter().map(|(_, w)| *w).sum();
        let points: Vec<HPoint<T>> = nb.iter().map(|(u, _)| values[*u]).collect();
        let weights: Vec<T> = nb.iter().map(|(_, w)| *w / total).collect();
        karcher_mean(&points, &weights, Some(&values[v]), &opts.karcher).map_err(|source| DirichletError::Update { vertex: v, source })
    };
    for sweep in 1..=opts.max_sweeps {
        movement = T::zero();
        for class in &classes {
            let fresh: Vec<HPoint<T>> = if class.len() >= PARALLEL_MIN {
                class.par_iter().map(|v| update(&map.values, *v)).collect::<Result<_, _>>()?
            } else {
                class.iter().map(|v| update(&map.values, *v)).collect::<Result<_, _>>()?
            };
            for (v, value) in class.iter().zip(fresh) {
                movement = movement.max(dist(&map.values[*v], &value));
                map.values[*v] = value;
            }
        }
        energies.push(map.energy().to_f64_lossy());
        if movement <= opts.tol {
            return Ok(Relaxation { map, energies, sweeps: sweep, max_update: movement, converged: true });
        }
    }
    let converged = classes.is_empty();
    Ok(Relaxation { map, energies, sweeps: opts.max_sweeps, max_update: movement, converged })
}

/// Discrete harmonic map of `mesh` agreeing with the extension of `f` on the
/// boundary sphere, started from the extension itself. A run that exhausts
/// `max_sweeps` is returned with `converged == false`.
pub fn solve_dirichlet<'m, T: Real>(
    f: &SphereMap<T>,
    mesh: &'m BallMesh<T>,
    opts: &DirichletOptions<T>,
) -> Result<DirichletSolution<'m, T>, DirichletError> {
    if f.n() + 1 != mesh.dim() {
        return Err(DirichletError::DimensionMismatch { map: f.n(), ball: mesh.dim() });
    }
    let extension = Extension::new(f.clone(), opts.extension.clone())?;
    let reference: Vec<HPoint<T>> = mesh.vertices().par_iter().map(|v| extension.value(v)).collect::<Result<_, _>>()?;
    let Relaxation { map, energies, sweeps, max_update, converged } = relax(mesh, reference.clone(), opts)?;
    let (rho_r, rho_vertex) = displacement(&map, &reference);
    let report = FlowReport {
        energies,
        iterations: sweeps,
        max_update: max_update.to_f64_lossy(),
        converged,
        balance_residual: map.balance_residual().to_f64_lossy(),
        rho_r: rho_r.to_f64_lossy(),
        rho_vertex,
    };
    Ok(DirichletSolution { map, reference, report })
}

fn displacement<T: Real>(map: &DiscreteMap<'_, T>, reference: &[HPoint<T>]) -> (T, usize) {
    map.values
        .iter()
        .zip(reference)
        .map(|(h, f)| dist(h, f))
        .enumerate()
        .fold((T::zero(), 0), |best, (v, d)| if d > best.0 { (d, v) } else { best })
}

/// `max_v d(F(v), h(v))` over the mesh vertices.
pub fn rho<T: Real>(map: &DiscreteMap<'_, T>, extension: &Extension<T>) -> Result<T, DirichletError> {
    let reference: Vec<HPoint<T>> = map.mesh.vertices().par_iter().map(|v| extension.value(v)).collect::<Result<_, _>>()?;
    Ok(displacement(map, &reference).0)
}
