//! Numerical solution of the Dirichlet problem: radial shooting on annuli
//! and damped Newton continuation on planar grids.

pub mod continuation;
pub mod grid;
pub mod newton;
pub mod operator;
pub mod radial;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::conditions::{CurvatureField, CurvatureSummary, Verdict};
use crate::geometry::{GeometryError, Point};
use crate::json_float;

pub use continuation::{continuation_solve, uniform_schedule, ContinuationConfig};
pub use grid::{BoundaryData, BoundarySpec, Grid};
pub use newton::{newton_solve, LinearSolver, NewtonConfig};
pub use operator::mc_residual;
pub use radial::{log_sweep, nonexistence_sweep, radial_shoot, RadialError, RadialSolution, SweepRow, SweepSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Converged grid function with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    /// Values at the unknowns, in grid order.
    #[serde(skip)]
    pub values: Vec<f64>,
    pub spacing: f64,
    pub residual_inf: f64,
    pub sup_norm: f64,
    pub sup_gradient_interior: f64,
    pub sup_gradient_boundary: f64,
    pub newton_iters: usize,
    /// Homotopy parameter the solution belongs to.
    pub t: f64,
}

impl GridSolution {
    /// `x,y,f` rows for the unknowns followed by the boundary points.
    pub fn csv(&self, grid: &Grid) -> String {
        let mut out = String::from("x,y,f\n");
        for (node, v) in grid.nodes.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", node.x[0], node.x[1], v);
        }
        for (p, v) in grid.boundary_points() {
            let _ = writeln!(out, "{},{},{}", p[0], p[1], v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: f64,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub sup_norm: f64,
    pub sup_gradient: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ContinuationTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonFailureKind {
    NonConvergence,
    LineSearchStall,
    Singular,
    GradientBlowup,
    NonFinite,
    Config,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("Newton iteration failed ({kind:?}) with residual {residual_inf:e}, max gradient {max_gradient:e}")]
pub struct NewtonFailure {
    pub kind: NewtonFailureKind,
    pub residual_inf: f64,
    pub max_gradient: f64,
    pub iterate: Vec<f64>,
    /// Residual sup norm per iteration.
    pub history: Vec<f64>,
}

/// A continuation run that could not reach `t = 1`. Stalls are numerical
/// observations: they do not prove that no solution exists.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("continuation stalled ({label}): last solved t = {t_star:?}, failed at t = {attempted_t} ({reason:?})")]
pub struct ContinuationFailure {
    /// Last `t` that was solved, if any.
    pub t_star: Option<f64>,
    pub attempted_t: f64,
    #[serde(serialize_with = "json_float::serialize")]
    pub max_gradient: f64,
    pub reason: NewtonFailureKind,
    pub label: &'static str,
    pub detail: String,
    pub trace: ContinuationTrace,
}

impl ContinuationFailure {
    pub(crate) fn config(detail: String) -> Self {
        Self {
            t_star: None,
            attempted_t: 0.0,
            max_gradient: 0.0,
            reason: NewtonFailureKind::Config,
            label: "configuration",
            detail,
            trace: ContinuationTrace::default(),
        }
    }
}

/// Samples `|H| + |∇H|` and `H_z` over `points × [-M, M]`; returns the
/// estimated `h0` and whether `H_z >= 0` held at every sample.
pub fn verify_gradient_bound_inputs(field: &CurvatureField, points: &[Point], m: f64) -> (f64, Verdict, CurvatureSummary) {
    let s = field.summarize(points, m, 33);
    let verdict = if s.monotone { Verdict::Pass } else { Verdict::Fail };
    (s.h0, verdict, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::domain_sample_points;
    use crate::geometry::DomainSpec;

    #[test]
    fn gradient_bound_inputs_examples() {
        let pts = domain_sample_points(&DomainSpec::disc(1.0), 16, 16);
        let (h0, v, _) = verify_gradient_bound_inputs(&CurvatureField::affine(0.0, 1.0).unwrap(), &pts, 1.0);
        assert!((h0 - 2.0).abs() < 1e-12);
        assert_eq!(v, Verdict::Pass);
        let (h0, v, _) = verify_gradient_bound_inputs(&CurvatureField::constant(-0.4).unwrap(), &pts, 1.0);
        assert_eq!(h0, 0.4);
        assert_eq!(v, Verdict::Pass);
        // the blowup family: H_z < 0 near z = 0
        let eps = 0.1;
        let field = CurvatureField::from_fn(
            move |_, z| crate::verify::blowup_curvature(eps, z),
            move |_, z| ([0.0, 0.0], crate::verify::blowup_curvature_dz(eps, z)),
            false,
        );
        assert_eq!(verify_gradient_bound_inputs(&field, &pts, 1.0).1, Verdict::Fail);
    }

    #[test]
    fn solution_csv_has_header_and_boundary_rows() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 9).unwrap();
        let sol = newton_solve(&g, vec![0.0; g.len()], &CurvatureField::zero(), 1.0, &NewtonConfig::default()).unwrap();
        let csv = sol.csv(&g);
        assert!(csv.starts_with("x,y,f\n"));
        assert_eq!(csv.lines().count(), 1 + g.len() + g.boundary_points().len());
    }
}
