//! Boundary measures, their Busemann barycenters, Karcher means of interior
//! points, and the barycentric extension of boundary maps.

mod extension;
mod functional;
mod karcher;
mod measure;

use thiserror::Error;

use crate::boundary_maps::MapError;
use crate::hyperbolic::GeometryError;
use crate::Real;

pub use extension::{
    extend, extension_jacobian, normalize, second_derivative_norm, Extension, ExtensionEvaluation, ExtensionOptions,
    ExtensionScheme, SECOND_DERIVATIVE_STEP,
};
pub use functional::{
    barycenter, barycenter_from, busemann_functional, initial_guess, BarycenterResult, FunctionalValue, MAX_ATOM,
};
pub use karcher::karcher_mean;
pub use measure::{
    pushforward, quadrature, quadrature_with, reweight_visual, DiscreteMeasure, QuadratureRule, MIN_QUADRATURE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarycenterError {
    #[error("quadrature size {size} is below the minimum {min}")]
    QuadratureTooSmall { size: usize, min: usize },
    #[error("the symmetric lattice needs an even node count, got {0}")]
    OddQuadrature(usize),
    #[error("no quadrature on S^{0}")]
    UnsupportedSphere(usize),
    #[error("{nodes} nodes but {weights} weights")]
    LengthMismatch { nodes: usize, weights: usize },
    #[error("weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("total mass {0} is not 1")]
    Mass(f64),
    #[error("a measure needs at least two distinct nodes")]
    Degenerate,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("measure too concentrated: largest atom has weight {0}")]
    TooConcentrated(f64),
    #[error("no convergence in {iterations} iterations: gradient norm {gradient_norm:.3e} at {last:?}")]
    MaxIterations { iterations: usize, gradient_norm: f64, last: Vec<f64> },
    #[error("line search stalled with gradient norm {gradient_norm:.3e} at {last:?}")]
    Stalled { gradient_norm: f64, last: Vec<f64> },
    #[error("singular Hessian, smallest eigenvalue {0:.3e}")]
    SingularHessian(f64),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("at {point:?}: {source}")]
    AtPoint {
        point: Vec<f64>,
        #[source]
        source: Box<BarycenterError>,
    },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Stopping rule of the Newton solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Bound on the gradient norm at the returned point.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { tol: T::solver_tolerance(), max_iter: 100 }
    }
}
