//! Damped Newton iteration on the discrete operator.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use crate::conditions::CurvatureField;

use super::grid::Grid;
use super::operator::{evaluate, sup_norm, two_norm, Csr, Evaluation};
use super::{GridSolution, NewtonFailure, NewtonFailureKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearSolver {
    /// Sparse LU with partial pivoting.
    Direct,
    /// BiCGSTAB with Jacobi preconditioning.
    Iterative { rel_tol: f64, max_iters: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    /// Convergence when the sup norm of the residual is at most `tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub linear: LinearSolver,
    /// Iterates whose discrete gradient exceeds this are abandoned.
    pub gradient_limit: f64,
    /// Smallest step fraction tried by the line search.
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 40, linear: LinearSolver::Direct, gradient_limit: 1e3, min_step: 2f64.powi(-20) }
    }
}

/// Linear solver state; the LU symbolic analysis is reused across Newton
/// steps because the Jacobian pattern depends only on the grid.
#[derive(Default)]
pub struct LinearWorkspace {
    symbolic: Option<SymbolicLu<usize>>,
}

impl LinearWorkspace {
    pub fn solve(&mut self, n: usize, trips: &[(usize, usize, f64)], rhs: &[f64], kind: LinearSolver) -> Option<Vec<f64>> {
        let x = match kind {
            LinearSolver::Direct => self.solve_direct(n, trips, rhs)?,
            LinearSolver::Iterative { rel_tol, max_iters } => {
                bicgstab(&Csr::from_triplets(n, trips), rhs, rel_tol, max_iters)?
            }
        };
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    fn solve_direct(&mut self, n: usize, trips: &[(usize, usize, f64)], rhs: &[f64]) -> Option<Vec<f64>> {
        let entries: Vec<Triplet<usize, usize, f64>> = trips.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries).ok()?;
        if self.symbolic.is_none() {
            self.symbolic = SymbolicLu::try_new(mat.symbolic()).ok();
        }
        let symbolic = self.symbolic.clone()?;
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).ok()?;
        let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        lu.solve_in_place(b.as_mut());
        Some((0..n).map(|i| b[(i, 0)]).collect())
    }
}

/// BiCGSTAB with a Jacobi preconditioner; `None` on breakdown or when the
/// tolerance is not reached.
pub fn bicgstab(a: &Csr, b: &[f64], rel_tol: f64, max_iters: usize) -> Option<Vec<f64>> {
    let n = a.n;
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = two_norm(b);
    if bnorm == 0.0 {
        return Some(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return None;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv_diag[i] * p[i];
        }
        a.mul(&y, &mut v);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            return None;
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if two_norm(&s) <= rel_tol * bnorm {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Some(x);
        }
        for i in 0..n {
            z[i] = inv_diag[i] * s[i];
        }
        a.mul(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return None;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        if two_norm(&r) <= rel_tol * bnorm {
            return Some(x);
        }
    }
    None
}

fn solution(grid: &Grid, values: Vec<f64>, ev: &Evaluation, t: f64, iterations: usize) -> GridSolution {
    GridSolution {
        spacing: grid.spacing,
        residual_inf: sup_norm(&ev.residual),
        sup_norm: sup_norm(&values),
        sup_gradient_interior: ev.sup_gradient_interior,
        sup_gradient_boundary: ev.sup_gradient_boundary,
        newton_iters: iterations,
        t,
        values,
    }
}

/// Newton's method with Armijo backtracking on the residual 2-norm.
pub fn newton_solve(
    grid: &Grid,
    initial: Vec<f64>,
    field: &CurvatureField,
    t: f64,
    cfg: &NewtonConfig,
) -> Result<GridSolution, NewtonFailure> {
    let mut ws = LinearWorkspace::default();
    newton_solve_with(grid, initial, field, t, cfg, &mut ws)
}

pub fn newton_solve_with(
    grid: &Grid,
    initial: Vec<f64>,
    field: &CurvatureField,
    t: f64,
    cfg: &NewtonConfig,
    ws: &mut LinearWorkspace,
) -> Result<GridSolution, NewtonFailure> {
    let n = grid.len();
    let mut u = initial;
    assert_eq!(u.len(), n, "initial guess does not match the grid");
    let mut history = Vec::new();
    let fail = |kind, u: Vec<f64>, history: Vec<f64>, ev: &Evaluation| NewtonFailure {
        kind,
        residual_inf: sup_norm(&ev.residual),
        max_gradient: ev.sup_gradient_interior.max(ev.sup_gradient_boundary),
        iterate: u,
        history,
    };
    let mut ev = evaluate(grid, &u, field, t, true);
    for iter in 0..=cfg.max_iters {
        let res_inf = sup_norm(&ev.residual);
        history.push(res_inf);
        if !res_inf.is_finite() {
            return Err(fail(NewtonFailureKind::NonFinite, u, history, &ev));
        }
        if res_inf <= cfg.tol {
            return Ok(solution(grid, u, &ev, t, iter));
        }
        if iter == cfg.max_iters {
            break;
        }
        let rhs: Vec<f64> = ev.residual.iter().map(|r| -r).collect();
        let Some(delta) = ws.solve(n, &ev.jacobian, &rhs, cfg.linear) else {
            return Err(fail(NewtonFailureKind::Singular, u, history, &ev));
        };
        let norm0 = two_norm(&ev.residual);
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let norm = two_norm(&evaluate(grid, &trial, field, t, false).residual);
            if norm.is_finite() && norm <= (1.0 - 1e-4 * step) * norm0 {
                let tev = evaluate(grid, &trial, field, t, true);
                break Some((trial, tev));
            }
            step *= 0.5;
            if step < cfg.min_step {
                break None;
            }
        };
        let Some((next, next_ev)) = accepted else {
            return Err(fail(NewtonFailureKind::LineSearchStall, u, history, &ev));
        };
        u = next;
        ev = next_ev;
        if ev.sup_gradient_interior.max(ev.sup_gradient_boundary) > cfg.gradient_limit {
            return Err(fail(NewtonFailureKind::GradientBlowup, u, history, &ev));
        }
    }
    Err(fail(NewtonFailureKind::NonConvergence, u, history, &ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::solver::grid::BoundaryData;

    #[test]
    fn zero_curvature_zero_data_is_immediate() {
        let g = Grid::new(&DomainSpec::GridMask(square_mask()), BoundaryData::Zero, 12).unwrap();
        let s = newton_solve(&g, vec![0.0; g.len()], &CurvatureField::zero(), 1.0, &NewtonConfig::default()).unwrap();
        assert!(s.newton_iters <= 2, "{}", s.newton_iters);
        assert_eq!(s.sup_norm, 0.0);
        // a nonzero guess still lands on zero
        let s = newton_solve(&g, vec![0.3; g.len()], &CurvatureField::zero(), 1.0, &NewtonConfig::default()).unwrap();
        assert!(s.sup_norm < 1e-10);
    }

    fn square_mask() -> crate::geometry::GridMask {
        crate::geometry::GridMask::new(10, 10, vec![true; 100], 0.1, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn direct_and_iterative_agree() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 33).unwrap();
        let field = CurvatureField::constant(-0.5).unwrap();
        let direct = newton_solve(&g, vec![0.0; g.len()], &field, 1.0, &NewtonConfig::default()).unwrap();
        let cfg = NewtonConfig {
            linear: LinearSolver::Iterative { rel_tol: 1e-12, max_iters: 5000 },
            ..NewtonConfig::default()
        };
        let iterative = newton_solve(&g, vec![0.0; g.len()], &field, 1.0, &cfg).unwrap();
        let diff = direct.values.iter().zip(&iterative.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn bicgstab_solves_small_system() {
        let a = Csr::from_triplets(3, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (2, 0, 1.0)]);
        let x = bicgstab(&a, &[1.0, 2.0, 3.0], 1e-14, 100).unwrap();
        let mut y = vec![0.0; 3];
        a.mul(&x, &mut y);
        for (a, b) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
