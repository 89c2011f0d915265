//! Barrier constructions, solvability conditions and numerical solvers for
//! the prescribed mean curvature Dirichlet problem
//!
//! ```text
//! div( ∇f / sqrt(1 + |∇f|²) ) = n H(x, f)  in Ω,   f = g  on ∂Ω.
//! ```
//!
//! The one-dimensional numerics ([`quad`], [`roots`], [`barrier`] and the
//! scalar bounds in [`conditions`]) are generic over [`Real`] (`f32`/`f64`).
//! Grid geometry, the PDE solver and the verification layer work in `f64`.
//!
//! Orientation: with the upward normal, a graph has mean curvature `H` when
//! the divergence above equals `n H`. The nodoid barriers and spherical caps
//! built here have curvature `-h` and bulge upward; `H ↦ -H` mirrors
//! solutions (`f ↦ -f`).

pub mod barrier;
pub mod conditions;
pub mod geometry;
pub mod json_float;
pub mod quad;
pub mod real;
pub mod roots;
pub mod solver;
pub mod verify;

pub use real::Real;

pub type NodoidProfile64 = barrier::NodoidProfile<f64>;
pub type NodoidProfile32 = barrier::NodoidProfile<f32>;
pub type ProfileKernel64 = barrier::ProfileKernel<f64>;
pub type ProfileKernel32 = barrier::ProfileKernel<f32>;

pub use conditions::{ConditionReport, CurvatureField, Overall, Verdict};
pub use geometry::{AnnulusFit, DomainSpec};
pub use solver::{ContinuationTrace, GridSolution, RadialSolution};
pub use verify::EstimateReport;
