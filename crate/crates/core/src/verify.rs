//! Checks of computed solutions against the barrier estimates, closed-form
//! oracles, and the gradient blowup family.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::barrier::{BarrierError, NodoidProfile};
use crate::conditions::Verdict;
use crate::geometry::AnnulusFit;
use crate::json_float;
use crate::solver::grid::Neighbor;
use crate::solver::{Grid, GridSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("height check needs the annulus fit the profile was built for")]
    MissingFit,
    #[error("no spherical cap of curvature {h} spans a disc of radius {radius}")]
    NoCap { h: f64, radius: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("grids are not nested: {0}")]
    Grids(String),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
}

pub type Result<T, E = VerifyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    /// Barrier height `C1`.
    #[serde(serialize_with = "json_float::serialize")]
    pub c0_bound: f64,
    pub c0_actual: f64,
    /// Barrier slope `C2 = |p'(r)|`.
    #[serde(serialize_with = "json_float::serialize")]
    pub bgrad_bound: f64,
    pub bgrad_actual: f64,
    /// `max (|f(x)| - p(|x + translation|))` over the unknowns.
    pub barrier_violation: f64,
    pub slack: f64,
    pub height_verdict: Verdict,
    pub boundary_gradient_verdict: Verdict,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightCheck {
    pub verdict: Verdict,
    pub c0_bound: f64,
    pub c0_actual: f64,
    pub barrier_violation: f64,
}

/// `sup |f| <= C1 + slack` and `|f(x)| <= p(|x + τ|) + slack` at every
/// unknown, `τ` being the translation of the annulus fit.
pub fn check_height_estimate(
    grid: &Grid,
    values: &[f64],
    profile: &NodoidProfile<f64>,
    fit: Option<&AnnulusFit>,
    slack: f64,
) -> Result<HeightCheck> {
    let fit = fit.ok_or(VerifyError::MissingFit)?;
    let (c1, _) = profile.barrier_constants()?;
    let c0_actual = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut violation = f64::NEG_INFINITY;
    for (node, v) in grid.nodes.iter().zip(values) {
        let t = (node.x[0] + fit.translation[0]).hypot(node.x[1] + fit.translation[1]);
        let t = t.clamp(profile.r(), profile.r_usable());
        let eta = profile.height(t)?;
        violation = violation.max(v.abs() - eta);
    }
    let verdict = if c0_actual <= c1 + slack && violation <= slack { Verdict::Pass } else { Verdict::Fail };
    Ok(HeightCheck { verdict, c0_bound: c1, c0_actual, barrier_violation: violation })
}

/// Largest one-sided difference quotient `|f(P) - g| / l` over arms that
/// end on the boundary.
pub fn boundary_difference_quotient(grid: &Grid, values: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for (node, v) in grid.nodes.iter().zip(values) {
        for arm in &node.arms {
            if let Neighbor::Boundary { value, .. } = arm.neighbor {
                best = best.max((v - value).abs() / arm.length);
            }
        }
    }
    best
}

/// Boundary difference quotients against `C2 + slack`; not applicable
/// unless the boundary data vanish.
pub fn check_boundary_gradient(
    grid: &Grid,
    values: &[f64],
    profile: &NodoidProfile<f64>,
    slack: f64,
) -> Result<(Verdict, f64, f64)> {
    let (_, c2) = profile.barrier_constants()?;
    let actual = boundary_difference_quotient(grid, values);
    if !grid.boundary.is_zero() {
        return Ok((Verdict::NotApplicable, c2, actual));
    }
    Ok((Verdict::non_strict(actual, c2 + slack), c2, actual))
}

pub fn estimate_report(
    grid: &Grid,
    solution: &GridSolution,
    profile: &NodoidProfile<f64>,
    fit: &AnnulusFit,
    slack: f64,
) -> Result<EstimateReport> {
    let height = check_height_estimate(grid, &solution.values, profile, Some(fit), slack)?;
    let (bv, c2, bq) = check_boundary_gradient(grid, &solution.values, profile, slack)?;
    Ok(EstimateReport {
        c0_bound: height.c0_bound,
        c0_actual: height.c0_actual,
        bgrad_bound: c2,
        bgrad_actual: bq,
        barrier_violation: height.barrier_violation,
        slack,
        height_verdict: height.verdict,
        boundary_gradient_verdict: bv,
    })
}

/// Spherical cap of curvature `-h` over the disc `|x| < radius`, vanishing on
/// the boundary circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap {
    pub dim: usize,
    pub h: f64,
    pub radius: f64,
}

pub fn spherical_cap_oracle(dim: usize, h: f64, radius: f64) -> Result<SphericalCap> {
    if dim < 2 {
        return Err(VerifyError::Parameter(format!("dimension must be at least 2, got {dim}")));
    }
    if !(radius > 0.0) || !(h >= 0.0) {
        return Err(VerifyError::Parameter(format!("need radius > 0 and h >= 0, got {radius}, {h}")));
    }
    if h * radius >= 1.0 {
        return Err(VerifyError::NoCap { h, radius });
    }
    Ok(SphericalCap { dim, h, radius })
}

impl SphericalCap {
    /// `f(x) = sqrt(1/h² - |x|²) - sqrt(1/h² - R²)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.h == 0.0 {
            return 0.0;
        }
        let s2: f64 = x.iter().map(|v| v * v).sum();
        let rr = 1.0 / (self.h * self.h);
        // difference of square roots without cancellation
        (self.radius * self.radius - s2) / ((rr - s2).sqrt() + (rr - self.radius * self.radius).sqrt())
    }

    /// `|∇f|` at distance `s` from the centre.
    pub fn gradient_norm(&self, s: f64) -> f64 {
        if self.h == 0.0 {
            return 0.0;
        }
        s / (1.0 / (self.h * self.h) - s * s).sqrt()
    }
}

/// `H_ε(z) = -6z / (1 + (3z² + ε)²)^(3/2)`: the curvature of the graph
/// `x₁ = z³ + εz`, written as a function of its height.
pub fn blowup_curvature(epsilon: f64, z: f64) -> f64 {
    let q = 3.0 * z * z + epsilon;
    -6.0 * z / (1.0 + q * q).powf(1.5)
}

/// `dH_ε/dz`.
pub fn blowup_curvature_dz(epsilon: f64, z: f64) -> f64 {
    let q = 3.0 * z * z + epsilon;
    let w = 1.0 + q * q;
    -6.0 / w.powf(1.5) + 108.0 * z * z * q / w.powf(2.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    /// `f'(0) = 1/ε`, from the inverse function rule.
    pub fprime0: f64,
    /// Sampled `sup_{|z|<=1} (|H_ε| + |H_ε'|)`.
    pub h_bound: f64,
    /// Sampled `min_{|z|<=1} H_ε'`.
    pub min_hz: f64,
}

/// One row per `ε`, sampling `z ∈ [-1, 1]` at `samples` equally spaced
/// points.
pub fn gradient_blowup_example(epsilons: &[f64], samples: usize) -> Result<Vec<BlowupRow>> {
    if samples < 3 {
        return Err(VerifyError::Parameter("need at least 3 samples".into()));
    }
    epsilons
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(VerifyError::Parameter(format!("epsilon must lie in (0, 1], got {eps}")));
            }
            let mut h_bound: f64 = 0.0;
            let mut min_hz = f64::INFINITY;
            for k in 0..samples {
                let z = -1.0 + 2.0 * k as f64 / (samples - 1) as f64;
                let hz = blowup_curvature_dz(eps, z);
                h_bound = h_bound.max(blowup_curvature(eps, z).abs() + hz.abs());
                min_hz = min_hz.min(hz);
            }
            Ok(BlowupRow { epsilon: eps, fprime0: 1.0 / eps, h_bound, min_hz })
        })
        .collect()
}

pub fn blowup_csv(rows: &[BlowupRow]) -> String {
    let mut out = String::from("epsilon,fprime0,H_bound,minHz\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.epsilon, r.fprime0, r.h_bound, r.min_hz);
    }
    out
}

/// Richardson estimate of the fine-grid error, `sup |f_h - f_2h| / 3`, over
/// the nodes shared by two nested grids.
pub fn richardson_estimate(fine: &Grid, fine_values: &[f64], coarse: &Grid, coarse_values: &[f64]) -> Result<f64> {
    let same_origin = (fine.origin[0] - coarse.origin[0]).abs() < 1e-12 && (fine.origin[1] - coarse.origin[1]).abs() < 1e-12;
    if !same_origin || (2.0 * fine.spacing - coarse.spacing).abs() > 1e-12 * coarse.spacing {
        return Err(VerifyError::Grids("fine spacing must halve the coarse spacing on a common origin".into()));
    }
    let mut diff: f64 = 0.0;
    let mut shared = 0;
    for (k, node) in coarse.nodes.iter().enumerate() {
        if let Some(q) = fine.unknown_at(2 * node.i, 2 * node.j) {
            diff = diff.max((fine_values[q] - coarse_values[k]).abs());
            shared += 1;
        }
    }
    if shared == 0 {
        return Err(VerifyError::Grids("no shared nodes".into()));
    }
    Ok(diff / 3.0)
}

/// Observed convergence order from errors on grids refined by factor 2.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::CurvatureField;
    use crate::geometry::DomainSpec;
    use crate::solver::{continuation_solve, mc_residual, BoundaryData, ContinuationConfig};

    #[test]
    fn cap_values() {
        let cap = spherical_cap_oracle(2, 0.5, 1.0).unwrap();
        assert!((cap.eval(&[0.0, 0.0]) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!(cap.eval(&[1.0, 0.0]).abs() < 1e-16);
        assert_eq!(spherical_cap_oracle(2, 0.0, 1.0).unwrap().eval(&[0.3, 0.1]), 0.0);
        assert!(matches!(spherical_cap_oracle(2, 1.0, 1.0), Err(VerifyError::NoCap { .. })));
        // the boundary slope grows without bound as h R -> 1
        let g: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&h| spherical_cap_oracle(2, h, 1.0).unwrap().gradient_norm(1.0))
            .collect();
        assert!(g[0] < g[1] && g[1] < g[2] && g[2] > 20.0);
    }

    #[test]
    fn cap_residual_decreases_under_refinement() {
        let cap = spherical_cap_oracle(2, 0.5, 1.0).unwrap();
        let field = CurvatureField::constant(-0.5).unwrap();
        let mut res = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, n).unwrap();
            let u: Vec<f64> = g.nodes.iter().map(|nd| cap.eval(&nd.x)).collect();
            res.push(crate::solver::operator::sup_norm(&mc_residual(&g, &u, &field, 1.0)));
        }
        assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    }

    #[test]
    fn blowup_table_values() {
        let rows = gradient_blowup_example(&[1.0, 0.1, 0.01], 2001).unwrap();
        assert_eq!(rows[0].fprime0, 1.0);
        assert_eq!(rows[1].fprime0, 10.0);
        assert_eq!(rows[2].fprime0, 100.0);
        for r in &rows {
            assert_eq!(r.fprime0 * r.epsilon, 1.0);
            assert!(r.min_hz < 0.0);
            assert!(r.h_bound < 10.0);
        }
        let csv = blowup_csv(&rows);
        assert!(csv.starts_with("epsilon,fprime0,H_bound,minHz\n"));
        assert!(gradient_blowup_example(&[0.0], 11).is_err());
    }

    #[test]
    fn blowup_derivative_matches_finite_difference() {
        for &eps in &[1.0, 0.1, 0.01] {
            for k in 0..21 {
                let z = -1.0 + 0.1 * k as f64;
                let d = 1e-6;
                let fd = (blowup_curvature(eps, z + d) - blowup_curvature(eps, z - d)) / (2.0 * d);
                assert!((fd - blowup_curvature_dz(eps, z)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn zero_solution_passes_with_margin() {
        let dom = DomainSpec::annulus(1.0, 2.0);
        let fit = dom.annulus_fit(1.0).unwrap();
        let profile = NodoidProfile::for_annulus(2, 0.3, 1.0, 2.0).unwrap();
        let g = Grid::new(&dom, BoundaryData::Zero, 17).unwrap();
        let zeros = vec![0.0; g.len()];
        let hc = check_height_estimate(&g, &zeros, &profile, Some(&fit), 0.0).unwrap();
        assert_eq!(hc.verdict, Verdict::Pass);
        assert!(hc.c0_bound > 0.0);
        let (v, c2, actual) = check_boundary_gradient(&g, &zeros, &profile, 0.0).unwrap();
        assert_eq!(v, Verdict::Pass);
        assert!(actual == 0.0 && c2 > 0.0);
        assert_eq!(check_height_estimate(&g, &zeros, &profile, None, 0.0), Err(VerifyError::MissingFit));
    }

    #[test]
    fn annulus_solve_honours_barrier_and_scaled_copy_does_not() {
        let dom = DomainSpec::annulus(1.0, 2.0);
        let fit = dom.annulus_fit(1.0).unwrap();
        let profile = NodoidProfile::for_annulus(2, 0.3, 1.0, 2.0).unwrap();
        let field = CurvatureField::constant(-0.3).unwrap();
        let g = Grid::new(&dom, BoundaryData::Zero, 33).unwrap();
        let (sol, _) = continuation_solve(&g, &field, &ContinuationConfig::default()).unwrap();
        let report = estimate_report(&g, &sol, &profile, &fit, 1e-3).unwrap();
        assert_eq!(report.height_verdict, Verdict::Pass, "{report:?}");
        assert_eq!(report.boundary_gradient_verdict, Verdict::Pass, "{report:?}");
        let scaled: Vec<f64> = sol.values.iter().map(|v| 10.0 * v).collect();
        let bad = check_height_estimate(&g, &scaled, &profile, Some(&fit), 1e-3).unwrap();
        assert_eq!(bad.verdict, Verdict::Fail);
    }

    #[test]
    fn boundary_gradient_not_applicable_for_nonzero_data() {
        let dom = DomainSpec::annulus(1.0, 2.0);
        let profile = NodoidProfile::for_annulus(2, 0.3, 1.0, 2.0).unwrap();
        let g = Grid::new(&dom, BoundaryData::Constant(0.1), 9).unwrap();
        let v = vec![0.1; g.len()];
        assert_eq!(check_boundary_gradient(&g, &v, &profile, 0.0).unwrap().0, Verdict::NotApplicable);
    }

    #[test]
    fn richardson_requires_nested_grids() {
        let a = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 9).unwrap();
        let b = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 17).unwrap();
        let c = Grid::new(&DomainSpec::disc(1.0), BoundaryData::Zero, 13).unwrap();
        assert!(richardson_estimate(&b, &vec![0.0; b.len()], &a, &vec![0.0; a.len()]).is_ok());
        assert!(richardson_estimate(&c, &vec![0.0; c.len()], &a, &vec![0.0; a.len()]).is_err());
        assert_eq!(observed_orders(&[4.0, 1.0, 0.25]), vec![2.0, 2.0]);
    }
}
