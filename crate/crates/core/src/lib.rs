//! Barycentric extensions of boundary maps of `S^n` into `H^{n+1}`,
//! a discrete harmonic-map Dirichlet solver, and empirical checks of the
//! quantitative estimates that drive them.
//!
//! The geometric core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The experiment drivers in [`verification`] run in
//! `f64`.

pub mod barycentric;
pub mod boundary_maps;
pub mod dirichlet;
pub mod hyperbolic;
pub mod linalg;
mod real;
pub mod sphere;
pub mod verification;

pub use real::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type HPointF64 = hyperbolic::HPoint<f64>;
pub type HPointF32 = hyperbolic::HPoint<f32>;
pub type BPointF64 = hyperbolic::BPoint<f64>;
pub type BPointF32 = hyperbolic::BPoint<f32>;
pub type MobiusIsometryF64 = hyperbolic::MobiusIsometry<f64>;
pub type MobiusIsometryF32 = hyperbolic::MobiusIsometry<f32>;
pub type SphereMapF64 = boundary_maps::SphereMap<f64>;
pub type SphereMapF32 = boundary_maps::SphereMap<f32>;
