//! Cartesian grids cut by the domain boundary.
//!
//! Unknowns live at grid nodes inside the domain. An arm from a node towards
//! a neighbour that is not an unknown ends on the boundary (Shortley–Weller),
//! where the Dirichlet value is taken.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{DomainSpec, Point};

use super::SolverError;

/// Nodes closer than this fraction of the spacing to the boundary are
/// treated as boundary points.
pub const BOUNDARY_SNAP: f64 = 1e-6;

/// Dirichlet data `g`.
#[derive(Clone)]
pub enum BoundaryData {
    Zero,
    Constant(f64),
    /// `g(x) = c + gradient · x`.
    Affine { c: f64, gradient: [f64; 2] },
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryData::Zero => write!(f, "Zero"),
            BoundaryData::Constant(c) => write!(f, "Constant({c})"),
            BoundaryData::Affine { c, gradient } => write!(f, "Affine({c}, {gradient:?})"),
            BoundaryData::Function(_) => write!(f, "Function"),
        }
    }
}

impl BoundaryData {
    pub fn eval(&self, x: Point) -> f64 {
        match self {
            BoundaryData::Zero => 0.0,
            BoundaryData::Constant(c) => *c,
            BoundaryData::Affine { c, gradient } => c + gradient[0] * x[0] + gradient[1] * x[1],
            BoundaryData::Function(g) => g(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BoundaryData::Zero) || matches!(self, BoundaryData::Constant(c) if *c == 0.0)
    }
}

/// JSON form of the boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    #[default]
    Zero,
    Constant { value: f64 },
    Affine { c: f64, gradient: [f64; 2] },
}

impl BoundarySpec {
    pub fn to_data(&self) -> BoundaryData {
        match self {
            BoundarySpec::Zero => BoundaryData::Zero,
            BoundarySpec::Constant { value } => BoundaryData::Constant(*value),
            BoundarySpec::Affine { c, gradient } => BoundaryData::Affine { c: *c, gradient: *gradient },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    Unknown(usize),
    Boundary { point: Point, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub length: f64,
    pub neighbor: Neighbor,
}

/// Arm order: east, west, north, south.
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;
const DIRS: [Point; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub x: Point,
    pub arms: [Arm; 4],
}

impl Node {
    /// All four arms have full length and end at unknowns.
    pub fn is_regular(&self, spacing: f64) -> bool {
        self.arms.iter().all(|a| matches!(a.neighbor, Neighbor::Unknown(_)) && a.length == spacing)
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: DomainSpec,
    pub boundary: BoundaryData,
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<Node>,
    index: Vec<Option<usize>>,
}

impl Grid {
    /// Square-cell grid over the bounding box of `domain` with
    /// `nodes_per_axis` nodes along its longer side.
    pub fn new(domain: &DomainSpec, boundary: BoundaryData, nodes_per_axis: usize) -> Result<Self, SolverError> {
        domain.validate()?;
        if nodes_per_axis < 3 {
            return Err(SolverError::Config(format!("need at least 3 nodes per axis, got {nodes_per_axis}")));
        }
        let (lo, hi) = domain.bounding_box();
        let (w, ht) = (hi[0] - lo[0], hi[1] - lo[1]);
        let spacing = w.max(ht) / (nodes_per_axis - 1) as f64;
        let nx = (w / spacing).round() as usize + 1;
        let ny = (ht / spacing).round() as usize + 1;
        let at = |i: usize, j: usize| [lo[0] + i as f64 * spacing, lo[1] + j as f64 * spacing];
        let snap = BOUNDARY_SNAP * spacing;

        // candidates: inside and not within `snap` of the boundary along an axis
        let mut exits = vec![[None; 4]; nx * ny];
        let mut candidate = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = at(i, j);
                if !domain.contains(p) {
                    continue;
                }
                let k = j * nx + i;
                let mut ok = true;
                for (d, dir) in DIRS.iter().enumerate() {
                    exits[k][d] = domain.ray_exit(p, *dir, spacing);
                    if exits[k][d].is_some_and(|t| t < snap) {
                        ok = false;
                    }
                }
                candidate[k] = ok;
            }
        }
        let mut index = vec![None; nx * ny];
        let mut count = 0;
        for (k, c) in candidate.iter().enumerate() {
            if *c {
                index[k] = Some(count);
                count += 1;
            }
        }
        if count == 0 {
            return Err(SolverError::Config("grid has no interior nodes; refine it".into()));
        }
        let mut nodes = Vec::with_capacity(count);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if !candidate[k] {
                    continue;
                }
                let p = at(i, j);
                let neighbor_index = |d: usize| -> Option<usize> {
                    let (ii, jj) = match d {
                        EAST => (i as isize + 1, j as isize),
                        WEST => (i as isize - 1, j as isize),
                        NORTH => (i as isize, j as isize + 1),
                        _ => (i as isize, j as isize - 1),
                    };
                    if ii < 0 || jj < 0 || ii as usize >= nx || jj as usize >= ny {
                        return None;
                    }
                    index[jj as usize * nx + ii as usize]
                };
                let mut arms = [Arm { length: spacing, neighbor: Neighbor::Unknown(0) }; 4];
                for (d, arm) in arms.iter_mut().enumerate() {
                    let exit = exits[k][d];
                    *arm = match (exit, neighbor_index(d)) {
                        (None, Some(q)) => Arm { length: spacing, neighbor: Neighbor::Unknown(q) },
                        (exit, _) => {
                            let t = exit.unwrap_or(spacing);
                            let point = [p[0] + t * DIRS[d][0], p[1] + t * DIRS[d][1]];
                            Arm { length: t, neighbor: Neighbor::Boundary { point, value: boundary.eval(point) } }
                        }
                    };
                }
                nodes.push(Node { i, j, x: p, arms });
            }
        }
        Ok(Self { domain: domain.clone(), boundary, origin: lo, spacing, nx, ny, nodes, index })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Unknown index of grid node `(i, j)`, if it is one.
    pub fn unknown_at(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        self.index[j * self.nx + i]
    }

    /// Boundary points reached by arms, deduplicated, in a fixed order.
    pub fn boundary_points(&self) -> Vec<(Point, f64)> {
        let mut seen = BTreeMap::new();
        for node in &self.nodes {
            for arm in &node.arms {
                if let Neighbor::Boundary { point, value } = arm.neighbor {
                    seen.entry((point[0].to_bits(), point[1].to_bits())).or_insert((point, value));
                }
            }
        }
        seen.into_values().collect()
    }

    /// Largest difference quotient of the boundary data between sampled
    /// boundary points.
    pub fn boundary_lipschitz(&self) -> f64 {
        match &self.boundary {
            BoundaryData::Zero | BoundaryData::Constant(_) => 0.0,
            BoundaryData::Affine { gradient, .. } => gradient[0].hypot(gradient[1]),
            BoundaryData::Function(_) => {
                let pts = self.boundary_points();
                let mut best: f64 = 0.0;
                for a in 0..pts.len() {
                    for b in a + 1..pts.len() {
                        let d = (pts[a].0[0] - pts[b].0[0]).hypot(pts[a].0[1] - pts[b].0[1]);
                        if d > 0.0 {
                            best = best.max((pts[a].1 - pts[b].1).abs() / d);
                        }
                    }
                }
                best
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_grid_structure() {
        let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 9).unwrap();
        assert_eq!((g.nx, g.ny), (9, 9));
        assert_eq!(g.spacing, 0.25);
        // nodes on the circle itself, like (1, 0), are boundary points
        assert!(g.unknown_at(8, 4).is_none());
        assert!(g.unknown_at(4, 4).is_some());
        for node in &g.nodes {
            assert!((node.x[0].hypot(node.x[1])) < 1.0);
            for arm in &node.arms {
                assert!(arm.length > 0.0 && arm.length <= g.spacing);
                if let Neighbor::Boundary { point, value } = arm.neighbor {
                    assert!((point[0].hypot(point[1]) - 1.0).abs() < 1e-12);
                    assert_eq!(value, 0.0);
                }
            }
        }
        let center = &g.nodes[g.unknown_at(4, 4).unwrap()];
        assert!(center.is_regular(g.spacing));
    }

    #[test]
    fn arms_are_symmetric_between_unknowns() {
        let g = Grid::new(&DomainSpec::annulus(1.0, 2.0), BoundaryData::Constant(1.0), 17).unwrap();
        for (k, node) in g.nodes.iter().enumerate() {
            for (d, back) in [(EAST, WEST), (WEST, EAST), (NORTH, SOUTH), (SOUTH, NORTH)] {
                if let Neighbor::Unknown(q) = node.arms[d].neighbor {
                    assert_eq!(g.nodes[q].arms[back].neighbor, Neighbor::Unknown(k));
                }
            }
        }
        assert!(g.boundary_points().iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn lipschitz_of_affine_data() {
        let g = Grid::new(
            &DomainSpec::rectangle(1.0, 1.0),
            BoundaryData::Affine { c: 0.0, gradient: [0.3, 0.4] },
            5,
        )
        .unwrap();
        assert!((g.boundary_lipschitz() - 0.5).abs() < 1e-15);
        let f = Grid::new(
            &DomainSpec::rectangle(1.0, 1.0),
            BoundaryData::Function(Arc::new(|x: Point| 0.3 * x[0] + 0.4 * x[1])),
            5,
        )
        .unwrap();
        assert!(f.boundary_lipschitz() <= 0.5 + 1e-12);
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        assert!(Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 2).is_err());
    }
}
