//! Discrete mean curvature operator in divergence form and its Jacobian.
//!
//! At every cell edge the flux `∂_ν f / W` uses the normal difference across
//! the edge and, inside `W = sqrt(1 + |∇f|²)`, the tangential derivative
//! averaged from the two edge nodes (extrapolated to the arm midpoint on arms
//! that end on the boundary). Fluxes between two unknowns are shared,
//! so the scheme is conservative away from the boundary. The residual at a
//! node is
//!
//! ```text
//! (F_e - F_w) / ((l_e + l_w)/2) + (F_n - F_s) / ((l_n + l_s)/2) - t·n·H(x, f)
//! ```
//!
//! with `l_*` the (possibly cut) arm lengths and `n = 2`.

use crate::conditions::CurvatureField;

use super::grid::{Grid, Neighbor, EAST, NORTH, SOUTH, WEST};

/// Spatial dimension of grid problems.
pub const GRID_DIM: f64 = 2.0;

/// Affine form `constant + Σ coef·u[idx]` with at most `N` terms.
#[derive(Debug, Clone, Copy)]
struct Lin<const N: usize> {
    value: f64,
    idx: [usize; N],
    coef: [f64; N],
    len: usize,
}

impl<const N: usize> Lin<N> {
    fn new() -> Self {
        Self { value: 0.0, idx: [0; N], coef: [0.0; N], len: 0 }
    }

    fn push(&mut self, i: usize, c: f64) {
        self.idx[self.len] = i;
        self.coef[self.len] = c;
        self.len += 1;
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(|k| (self.idx[k], self.coef[k]))
    }
}

fn neighbor_value(u: &[f64], n: Neighbor) -> (f64, Option<usize>) {
    match n {
        Neighbor::Unknown(q) => (u[q], Some(q)),
        Neighbor::Boundary { value, .. } => (value, None),
    }
}

/// Derivative at node `k` along the axis of arms `(plus, minus)`, exact for
/// quadratics on unequal arms.
fn axis_derivative(grid: &Grid, u: &[f64], k: usize, plus: usize, minus: usize) -> Lin<3> {
    let node = &grid.nodes[k];
    let (lp, lm) = (node.arms[plus].length, node.arms[minus].length);
    let (vp, ip) = neighbor_value(u, node.arms[plus].neighbor);
    let (vm, im) = neighbor_value(u, node.arms[minus].neighbor);
    let cp = lm / (lp * (lp + lm));
    let cm = -lp / (lm * (lp + lm));
    let c0 = -(cp + cm);
    let mut lin = Lin::new();
    lin.value = cp * vp + cm * vm + c0 * u[k];
    lin.push(k, c0);
    if let Some(q) = ip {
        lin.push(q, cp);
    }
    if let Some(q) = im {
        lin.push(q, cm);
    }
    lin
}

/// Edge flux `g/W` with `W = sqrt(1 + g² + t²)` and its partials.
#[inline]
fn flux(g: f64, t: f64) -> (f64, f64, f64) {
    let w2 = 1.0 + g * g + t * t;
    let w = w2.sqrt();
    let w3 = w2 * w;
    (g / w, (1.0 + t * t) / w3, -g * t / w3)
}

/// Residual, optional Jacobian triplets, and gradient diagnostics of one
/// evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub residual: Vec<f64>,
    pub jacobian: Vec<(usize, usize, f64)>,
    /// Largest `|∇f|` over edges between two unknowns.
    pub sup_gradient_interior: f64,
    /// Largest one-sided difference quotient `|f(P) - g| / l` over arms that
    /// end on the boundary.
    pub sup_gradient_boundary: f64,
}

/// Evaluates the discrete operator at `u` for homotopy parameter `t_h`.
pub fn evaluate(grid: &Grid, u: &[f64], field: &CurvatureField, t_h: f64, jacobian: bool) -> Evaluation {
    let n = grid.len();
    assert_eq!(u.len(), n, "value vector does not match the grid");
    let mut res = vec![0.0; n];
    let mut jac = Vec::with_capacity(if jacobian { n * 24 } else { 0 });
    let mut sup_in: f64 = 0.0;
    let mut sup_bd: f64 = 0.0;

    // Half-widths of the control intervals.
    let mx: Vec<f64> = grid.nodes.iter().map(|nd| 0.5 * (nd.arms[EAST].length + nd.arms[WEST].length)).collect();
    let my: Vec<f64> = grid.nodes.iter().map(|nd| 0.5 * (nd.arms[NORTH].length + nd.arms[SOUTH].length)).collect();
    let dx: Vec<Lin<3>> = (0..n).map(|k| axis_derivative(grid, u, k, EAST, WEST)).collect();
    let dy: Vec<Lin<3>> = (0..n).map(|k| axis_derivative(grid, u, k, NORTH, SOUTH)).collect();

    for k in 0..n {
        let node = &grid.nodes[k];
        // (arm, sign in P's divergence, tangential derivative table, width)
        for (d, sign, tang, width) in [
            (EAST, 1.0, &dy, &mx),
            (WEST, -1.0, &dy, &mx),
            (NORTH, 1.0, &dx, &my),
            (SOUTH, -1.0, &dx, &my),
        ] {
            let arm = node.arms[d];
            let other = match arm.neighbor {
                Neighbor::Unknown(q) => Some(q),
                Neighbor::Boundary { .. } => None,
            };
            // shared edges are handled once, from the west/south node
            if other.is_some() && (d == WEST || d == SOUTH) {
                continue;
            }
            let (v_other, _) = neighbor_value(u, arm.neighbor);
            // derivative along the positive axis direction
            let g = sign * (v_other - u[k]) / arm.length;
            let mut tl: Lin<6> = Lin::new();
            match other {
                Some(q) => {
                    tl.value = 0.5 * (tang[k].value + tang[q].value);
                    for (i, c) in tang[k].terms().chain(tang[q].terms()) {
                        tl.push(i, 0.5 * c);
                    }
                }
                None => {
                    // extrapolate to the arm midpoint through the opposite node
                    let opposite = node.arms[d ^ 1];
                    let (wp, wq, q) = match opposite.neighbor {
                        Neighbor::Unknown(q) => {
                            let s = 0.5 * arm.length / opposite.length;
                            (1.0 + s, -s, Some(q))
                        }
                        Neighbor::Boundary { .. } => (1.0, 0.0, None),
                    };
                    tl.value = wp * tang[k].value;
                    for (i, c) in tang[k].terms() {
                        tl.push(i, wp * c);
                    }
                    if let Some(q) = q {
                        tl.value += wq * tang[q].value;
                        for (i, c) in tang[q].terms() {
                            tl.push(i, wq * c);
                        }
                    }
                }
            }
            let (f, f_g, f_t) = flux(g, tl.value);
            let grad = g.hypot(tl.value);
            match other {
                Some(q) => {
                    sup_in = sup_in.max(grad);
                    res[k] += f / width[k];
                    res[q] -= f / width[q];
                    if jacobian {
                        let gk = -1.0 / arm.length;
                        let gq = 1.0 / arm.length;
                        for (row, s) in [(k, 1.0 / width[k]), (q, -1.0 / width[q])] {
                            jac.push((row, k, s * f_g * gk));
                            jac.push((row, q, s * f_g * gq));
                            for (i, c) in tl.terms() {
                                jac.push((row, i, s * f_t * c));
                            }
                        }
                    }
                }
                None => {
                    sup_bd = sup_bd.max(g.abs());
                    res[k] += sign * f / width[k];
                    if jacobian {
                        let s = sign / width[k];
                        jac.push((k, k, s * f_g * (-sign / arm.length)));
                        for (i, c) in tl.terms() {
                            jac.push((k, i, s * f_t * c));
                        }
                    }
                }
            }
        }
        let h = field.eval(node.x, u[k]);
        res[k] -= t_h * GRID_DIM * h;
        if jacobian {
            let (_, hz) = field.grad(node.x, u[k]);
            jac.push((k, k, -t_h * GRID_DIM * hz));
        }
    }
    Evaluation { residual: res, jacobian: jac, sup_gradient_interior: sup_in, sup_gradient_boundary: sup_bd }
}

/// Per-node residual of the discrete operator.
pub fn mc_residual(grid: &Grid, u: &[f64], field: &CurvatureField, t_h: f64) -> Vec<f64> {
    evaluate(grid, u, field, t_h, false).residual
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compressed sparse rows built from triplets (duplicates summed).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(n: usize, trips: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..trips.len()).collect();
        order.sort_by_key(|&i| (trips[i].0, trips[i].1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = trips[i];
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[r] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::solver::grid::BoundaryData;
    use std::sync::Arc;

    #[test]
    fn constants_and_planes_are_exact_zeros() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 17).unwrap();
        let r = mc_residual(&g, &vec![0.0; g.len()], &CurvatureField::zero(), 1.0);
        assert!(r.iter().all(|&x| x == 0.0));

        let plane = |x: [f64; 2]| 0.3 + 0.7 * x[0] - 1.1 * x[1];
        let sq = Grid::new(&DomainSpec::rectangle(1.0, 1.0), BoundaryData::Function(Arc::new(plane)), 21).unwrap();
        let u: Vec<f64> = sq.nodes.iter().map(|n| plane(n.x)).collect();
        assert!(sup_norm(&mc_residual(&sq, &u, &CurvatureField::zero(), 1.0)) < 1e-12);

        let disc = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Function(Arc::new(plane)), 23).unwrap();
        let u: Vec<f64> = disc.nodes.iter().map(|n| plane(n.x)).collect();
        assert!(sup_norm(&mc_residual(&disc, &u, &CurvatureField::zero(), 1.0)) < 1e-10);
    }

    #[test]
    fn curvature_term_scales_with_homotopy() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 9).unwrap();
        let h = CurvatureField::constant(0.5).unwrap();
        let r = mc_residual(&g, &vec![0.0; g.len()], &h, 0.5);
        assert!(r.iter().all(|&x| (x + 0.5).abs() < 1e-15));
    }

    fn cap(h: f64, x: [f64; 2]) -> f64 {
        let r2 = 1.0 / (h * h);
        (r2 - x[0] * x[0] - x[1] * x[1]).sqrt() - (r2 - 1.0).sqrt()
    }

    #[test]
    fn spherical_cap_truncation_is_second_order_away_from_cut_cells() {
        // Closed-form cap of curvature -h over the unit disc.
        let h = 0.5;
        let field = CurvatureField::constant(-h).unwrap();
        let mut regular = Vec::new();
        let mut all = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, n).unwrap();
            let u: Vec<f64> = g.nodes.iter().map(|nd| cap(h, nd.x)).collect();
            let r = mc_residual(&g, &u, &field, 1.0);
            // the node and its four neighbours all have full arms
            let deep = |nd: &crate::solver::grid::Node| {
                nd.is_regular(g.spacing)
                    && nd.arms.iter().all(|a| match a.neighbor {
                        Neighbor::Unknown(q) => g.nodes[q].is_regular(g.spacing),
                        Neighbor::Boundary { .. } => false,
                    })
            };
            let reg = g.nodes.iter().zip(&r).filter(|(nd, _)| deep(nd)).fold(0.0f64, |m, (_, x)| m.max(x.abs()));
            regular.push(reg);
            all.push(sup_norm(&r));
        }
        for w in regular.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8 && order < 2.2, "regular-node order {order}");
        }
        // cut stencils next to the circle are only first-order consistent
        for w in all.windows(2) {
            assert!(w[1] < w[0], "{all:?}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = Grid::new(&DomainSpec::annulus(1.0, 2.0), BoundaryData::Constant(0.2), 11).unwrap();
        let field = CurvatureField::affine(-0.3, 0.7).unwrap();
        let u: Vec<f64> = g.nodes.iter().map(|n| 0.5 * (n.x[0] * 1.3).sin() + 0.2 * n.x[1]).collect();
        let ev = evaluate(&g, &u, &field, 0.8, true);
        let csr = Csr::from_triplets(g.len(), &ev.jacobian);
        let eps = 1e-7;
        for col in (0..g.len()).step_by(5) {
            let mut up = u.clone();
            let mut um = u.clone();
            up[col] += eps;
            um[col] -= eps;
            let rp = mc_residual(&g, &up, &field, 0.8);
            let rm = mc_residual(&g, &um, &field, 0.8);
            let mut e = vec![0.0; g.len()];
            e[col] = 1.0;
            let mut jcol = vec![0.0; g.len()];
            csr.mul(&e, &mut jcol);
            for row in 0..g.len() {
                let fd = (rp[row] - rm[row]) / (2.0 * eps);
                assert!((fd - jcol[row]).abs() < 1e-5 * (1.0 + fd.abs()), "({row},{col}): {fd} vs {}", jcol[row]);
            }
        }
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = Csr::from_triplets(2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (1, 0, -1.0)]);
        let mut y = vec![0.0; 2];
        m.mul(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![4.0, 1.0]);
        assert_eq!(m.diagonal(), vec![4.0, 2.0]);
    }
}
