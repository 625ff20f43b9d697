//! Discrete harmonic maps from polar meshes of `B(o, R)` into hyperbolic
//! space, with boundary values given by a barycentric extension.

mod diagnostics;
mod mesh;
mod solver;

use thiserror::Error;

use crate::barycentric::BarycenterError;
use crate::hyperbolic::GeometryError;

pub use diagnostics::{angle_bound, proof_diagnostics, triangle_angle, DiagnosticOptions, ProofDiagnostics, SKIP_BELOW};
pub use mesh::{build_mesh, BallMesh, EdgeWeights, RADIUS_RANGE, SPACING_RANGE};
pub use solver::{relax, rho, solve_dirichlet, DirichletOptions, DirichletSolution, DiscreteMap, FlowReport, Relaxation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirichletError {
    #[error("ball radius {0} outside [0.5, 8]")]
    RadiusOutOfRange(f64),
    #[error("mesh spacing {0} outside [0.01, 0.5]")]
    SpacingOutOfRange(f64),
    #[error("meshes exist for S^1 and S^2 boundaries, not S^{0}")]
    UnsupportedSphere(usize),
    #[error("cotangent weights need a two-dimensional domain")]
    UnsupportedWeights,
    #[error("mesh graph is disconnected")]
    Disconnected,
    #[error("map acts on S^{map} but the mesh bounds a ball in H^{ball}")]
    DimensionMismatch { map: usize, ball: usize },
    #[error("no convergence after {sweeps} sweeps (last movement {max_update:.3e})")]
    NotConverged { sweeps: usize, max_update: f64 },
    #[error("interior update failed at vertex {vertex}")]
    Update {
        vertex: usize,
        #[source]
        source: BarycenterError,
    },
    #[error("boundary data: {0}")]
    Boundary(#[from] BarycenterError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
