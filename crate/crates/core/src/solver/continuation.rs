//! Continuation in `t` for the family `div(∇f/W) = t·n·H(x, f)`.

use serde::{Deserialize, Serialize};

use crate::conditions::CurvatureField;

use super::grid::Grid;
use super::newton::{newton_solve_with, LinearWorkspace, NewtonConfig};
use super::{ContinuationFailure, ContinuationTrace, GridSolution, TraceStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    /// Increasing values in `[0, 1]` ending at 1.
    pub schedule: Vec<f64>,
    /// Failed steps are bisected until they would be shorter than this.
    pub min_step: f64,
    pub newton: NewtonConfig,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self { schedule: uniform_schedule(11), min_step: 1e-3, newton: NewtonConfig::default() }
    }
}

/// `steps` equally spaced values from 0 to 1.
pub fn uniform_schedule(steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect()
}

fn validate(schedule: &[f64]) -> Result<(), String> {
    if schedule.is_empty() {
        return Err("schedule is empty".into());
    }
    if schedule.last() != Some(&1.0) {
        return Err("schedule must end at 1".into());
    }
    if schedule.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err("schedule values must lie in [0, 1]".into());
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err("schedule must be strictly increasing".into());
    }
    Ok(())
}

/// Solves the `t`-family along the schedule, warm-starting every step from
/// the previous solution. A zero curvature field is solved in one step.
pub fn continuation_solve(
    grid: &Grid,
    field: &CurvatureField,
    cfg: &ContinuationConfig,
) -> Result<(GridSolution, ContinuationTrace), ContinuationFailure> {
    let mut trace = ContinuationTrace::default();
    let failure = |trace: ContinuationTrace, t_star: Option<f64>, attempted: f64, err: super::NewtonFailure| {
        ContinuationFailure {
            t_star,
            attempted_t: attempted,
            max_gradient: err.max_gradient,
            reason: err.kind,
            label: "numerical",
            detail: format!("residual {:e} after {} iterations", err.residual_inf, err.history.len()),
            trace,
        }
    };
    if let Err(msg) = validate(&cfg.schedule) {
        return Err(ContinuationFailure::config(msg));
    }
    let schedule: Vec<f64> = if field.is_zero() { vec![1.0] } else { cfg.schedule.clone() };
    let mut ws = LinearWorkspace::default();
    let mut u = vec![0.0; grid.len()];
    let mut current: Option<(f64, GridSolution)> = None;
    for &target in &schedule {
        let mut goal = target;
        loop {
            match newton_solve_with(grid, u.clone(), field, goal, &cfg.newton, &mut ws) {
                Ok(sol) => {
                    trace.steps.push(TraceStep {
                        t: goal,
                        newton_iters: sol.newton_iters,
                        final_residual: sol.residual_inf,
                        sup_norm: sol.sup_norm,
                        sup_gradient: sol.sup_gradient_interior.max(sol.sup_gradient_boundary),
                    });
                    u = sol.values.clone();
                    current = Some((goal, sol));
                    if goal == target {
                        break;
                    }
                    goal = target;
                }
                Err(err) => {
                    let Some((t_prev, _)) = &current else {
                        return Err(failure(trace, None, goal, err));
                    };
                    let mid = 0.5 * (t_prev + goal);
                    if mid - t_prev < cfg.min_step {
                        let t_star = Some(*t_prev);
                        return Err(failure(trace, t_star, goal, err));
                    }
                    goal = mid;
                }
            }
        }
    }
    let (_, sol) = current.expect("schedule ends at 1");
    Ok((sol, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::solver::grid::BoundaryData;

    #[test]
    fn zero_field_is_one_step() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Constant(0.5), 17).unwrap();
        let (sol, trace) = continuation_solve(&g, &CurvatureField::zero(), &ContinuationConfig::default()).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].t, 1.0);
        assert!(sol.values.iter().all(|v| (v - 0.5).abs() < 1e-10));
    }

    #[test]
    fn schedule_validation() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 9).unwrap();
        let field = CurvatureField::constant(-0.1).unwrap();
        for bad in [vec![], vec![0.0, 0.5], vec![0.5, 0.2, 1.0], vec![-0.1, 1.0]] {
            let cfg = ContinuationConfig { schedule: bad, ..Default::default() };
            assert!(continuation_solve(&g, &field, &cfg).is_err());
        }
    }

    #[test]
    fn trace_is_increasing_and_ends_at_one() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 33).unwrap();
        let field = CurvatureField::constant(-0.5).unwrap();
        let (sol, trace) = continuation_solve(&g, &field, &ContinuationConfig::default()).unwrap();
        assert_eq!(trace.steps.len(), 11);
        assert!(trace.steps.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(trace.steps.last().unwrap().t, 1.0);
        assert!(trace.steps.windows(2).all(|w| w[1].sup_norm >= w[0].sup_norm));
        assert!(sol.residual_inf <= 1e-10);
    }
}
