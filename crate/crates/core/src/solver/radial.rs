//! Rotationally symmetric solutions on annuli `{ε < |x| < outer}` with
//! constant curvature `-h` and zero boundary values, by shooting on the
//! integration constant.
//!
//! A radial solution is `p(t) = ∫_ε^t k(s) / sqrt(s^(2n-2) - k(s)²) ds` with
//! `k(s) = c - h sⁿ`. The radicand stays nonnegative on `[ε, outer]` exactly
//! when `a(c) <= ε` and `b(c) >= outer`; together with `k(ε) >= 0` this gives
//! the feasible interval
//!
//! ```text
//! max(h εⁿ, h outerⁿ - outer^(n-1)) <= c <= h εⁿ + ε^(n-1).
//! ```
//!
//! `P(c) = p(outer)` increases with `c`, so the root is found by bisection.

use serde::Serialize;
use thiserror::Error;

use crate::barrier::{BarrierError, ProfileKernel};
use crate::conditions::nonexistence_height_bound;
use crate::json_float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// No feasible integration constant meets the outer boundary condition.
    #[error("no radial solution: p(outer) ranges over [{p_min}, {p_max}] for feasible c in [{c_lo}, {c_hi}]")]
    Nonexistence { c_lo: f64, c_hi: f64, p_min: f64, p_max: f64 },
    #[error("shooting stopped at c = {c} with p(outer) = {miss} above the tolerance")]
    NearestMiss { c: f64, miss: f64 },
    #[error(transparent)]
    Barrier(#[from] BarrierError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub dim: usize,
    pub h: f64,
    pub epsilon: f64,
    pub outer: f64,
    pub c: f64,
    /// `k = c - h εⁿ >= 0`.
    pub k: f64,
    /// `p(outer)` at the returned `c`.
    pub miss: f64,
    #[serde(serialize_with = "json_float::serialize")]
    pub sup_p: f64,
    /// Radius of the maximum; `(c/h)^(1/n)` clamped to the annulus.
    pub t_max: f64,
    /// Smallest radicand over a fine mesh of `[ε, outer]`.
    pub min_radicand: f64,
    /// `(t, p(t))` on a uniform mesh.
    pub profile: Vec<(f64, f64)>,
    #[serde(skip)]
    kernel: ProfileKernel<f64>,
}

impl RadialSolution {
    /// `p(t)` for `ε <= t <= outer`.
    pub fn height(&self, t: f64) -> Result<f64, RadialError> {
        if !(t >= self.epsilon && t <= self.outer) {
            return Err(RadialError::Parameter(format!("t = {t} outside [{}, {}]", self.epsilon, self.outer)));
        }
        Ok(self.kernel.integrate(self.epsilon, t)?)
    }

    /// `p` at many radii, integrating between consecutive sorted radii.
    pub fn heights(&self, radii: &[f64]) -> Result<Vec<f64>, RadialError> {
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let mut out = vec![0.0; radii.len()];
        let (mut t_prev, mut p_prev) = (self.epsilon, 0.0);
        for i in order {
            let t = radii[i];
            if !(t >= self.epsilon && t <= self.outer) {
                return Err(RadialError::Parameter(format!("t = {t} outside the annulus")));
            }
            p_prev += self.kernel.integrate(t_prev, t)?;
            t_prev = t;
            out[i] = p_prev;
        }
        Ok(out)
    }

    pub fn slope(&self, t: f64) -> Result<f64, RadialError> {
        Ok(self.kernel.slope(t)?)
    }

    pub fn kernel(&self) -> &ProfileKernel<f64> {
        &self.kernel
    }
}

/// Feasible interval for the integration constant, or `None` if empty.
pub fn feasible_c(dim: usize, h: f64, epsilon: f64, outer: f64) -> Option<(f64, f64)> {
    let n = dim as i32;
    let lo = (h * epsilon.powi(n)).max(h * outer.powi(n) - outer.powi(n - 1));
    let hi = h * epsilon.powi(n) + epsilon.powi(n - 1);
    (lo <= hi).then_some((lo, hi))
}

fn shoot(dim: usize, h: f64, c: f64, epsilon: f64, outer: f64) -> Result<(ProfileKernel<f64>, f64), RadialError> {
    let kernel = ProfileKernel::new(dim, h, c)?;
    let p = kernel.integrate(epsilon, outer)?;
    Ok((kernel, p))
}

/// Finds `c` with `|p(outer)| <= tol`, or reports nonexistence.
pub fn radial_shoot(dim: usize, h: f64, epsilon: f64, outer: f64, tol: f64) -> Result<RadialSolution, RadialError> {
    if dim < 2 {
        return Err(RadialError::Parameter(format!("dimension must be at least 2, got {dim}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(RadialError::Parameter(format!("h must be positive, got {h}")));
    }
    if !(epsilon > 0.0 && outer > epsilon && outer.is_finite()) {
        return Err(RadialError::Parameter(format!("need 0 < epsilon < outer, got ({epsilon}, {outer})")));
    }
    if !(tol > 0.0) {
        return Err(RadialError::Parameter("tolerance must be positive".into()));
    }
    let Some((c_lo, c_hi)) = feasible_c(dim, h, epsilon, outer) else {
        return Err(RadialError::Nonexistence { c_lo: f64::NAN, c_hi: f64::NAN, p_min: f64::NAN, p_max: f64::NAN });
    };
    // Stay a hair inside the closed interval so both zeros are resolved.
    let pad = 1e-14 * c_hi;
    let (mut lo, mut hi) = (c_lo + pad, c_hi - pad);
    let (_, p_lo) = shoot(dim, h, lo, epsilon, outer)?;
    let (_, p_hi) = shoot(dim, h, hi, epsilon, outer)?;
    if p_lo > tol || p_hi < -tol {
        return Err(RadialError::Nonexistence { c_lo, c_hi, p_min: p_lo, p_max: p_hi });
    }
    let mut best = if p_lo.abs() < p_hi.abs() { (lo, p_lo) } else { (hi, p_hi) };
    for _ in 0..200 {
        if best.1.abs() <= tol * 1e-3 || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (_, pm) = shoot(dim, h, mid, epsilon, outer)?;
        if pm.abs() < best.1.abs() {
            best = (mid, pm);
        }
        if pm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (c, miss) = best;
    if miss.abs() > tol {
        return Err(RadialError::NearestMiss { c, miss });
    }
    let (kernel, _) = shoot(dim, h, c, epsilon, outer)?;
    let n = dim as i32;
    let t0 = (c / h).powf(1.0 / dim as f64);
    let t_max = t0.clamp(epsilon, outer);
    let sup_p = kernel.integrate(epsilon, t_max)?.max(0.0);

    let points = 201;
    let mesh: Vec<f64> = (0..points).map(|i| epsilon + (outer - epsilon) * i as f64 / (points - 1) as f64).collect();
    let mut profile = Vec::with_capacity(points);
    let mut acc = 0.0;
    let mut prev = epsilon;
    let mut min_radicand = f64::INFINITY;
    for &t in &mesh {
        acc += kernel.integrate(prev, t)?;
        prev = t;
        profile.push((t, acc));
        let k = c - h * t.powi(n);
        min_radicand = min_radicand.min(t.powi(2 * n - 2) - k * k);
    }
    // the last mesh point is outer itself; report the shooting value there
    if let Some(last) = profile.last_mut() {
        last.1 = miss;
    }
    Ok(RadialSolution {
        dim,
        h,
        epsilon,
        outer,
        c,
        k: c - h * epsilon.powi(n),
        miss,
        sup_p,
        t_max,
        min_radicand,
        profile,
        kernel,
    })
}

/// Residual of the radial operator
/// `t^(1-n) (t^(n-1) p'/sqrt(1+p'²))' + n h` on a uniform mesh, at the
/// interior mesh points.
pub fn radial_mc_residual(dim: usize, h: f64, mesh: &[f64], p: &[f64]) -> Vec<f64> {
    assert_eq!(mesh.len(), p.len());
    let m = dim as i32 - 1;
    let flux = |i: usize| {
        let dt = mesh[i + 1] - mesh[i];
        let g = (p[i + 1] - p[i]) / dt;
        let mid = 0.5 * (mesh[i] + mesh[i + 1]);
        mid.powi(m) * g / (1.0 + g * g).sqrt()
    };
    (1..mesh.len() - 1)
        .map(|i| {
            let width = 0.5 * (mesh[i + 1] - mesh[i - 1]);
            (flux(i) - flux(i - 1)) / (width * mesh[i].powi(m)) + dim as f64 * h
        })
        .collect()
}

/// One row of an `ε` sweep; `sup_p` is `NaN` when no solution exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub exists: bool,
    #[serde(serialize_with = "json_float::serialize")]
    pub sup_p: f64,
    /// Height bound `outer·B(ε/outer)` for any `h > 0`, where
    /// `B(ε) = ε arcosh(1/ε)` in the plane.
    pub bound: f64,
}

/// Summary of a sweep: the number of existence flips in sweep order and the
/// bracket `(largest ε without, smallest ε with a solution)` when the rows
/// split cleanly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub dim: usize,
    pub h: f64,
    pub outer: f64,
    pub flips: usize,
    pub epsilon_star: Option<(f64, f64)>,
    pub rows: Vec<SweepRow>,
}

/// Radial shooting over `epsilons` (in the given order). Errors other than
/// nonexistence are propagated.
pub fn nonexistence_sweep(dim: usize, h: f64, outer: f64, epsilons: &[f64], tol: f64) -> Result<SweepSummary, RadialError> {
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let bound = nonexistence_height_bound(dim, eps / outer)
            .map_err(|e| RadialError::Parameter(e.to_string()))?
            * outer;
        let (exists, sup_p) = match radial_shoot(dim, h, eps, outer, tol) {
            Ok(s) => (true, s.sup_p),
            Err(RadialError::Nonexistence { .. }) => (false, f64::NAN),
            Err(e) => return Err(e),
        };
        rows.push(SweepRow { epsilon: eps, exists, sup_p, bound });
    }
    let flips = rows.windows(2).filter(|w| w[0].exists != w[1].exists).count();
    let without = rows.iter().filter(|r| !r.exists).map(|r| r.epsilon).fold(f64::NAN, f64::max);
    let with = rows.iter().filter(|r| r.exists).map(|r| r.epsilon).fold(f64::NAN, f64::min);
    let epsilon_star = (without < with).then_some((without, with));
    Ok(SweepSummary { dim, h, outer, flips, epsilon_star, rows })
}

impl SweepSummary {
    /// CSV with header `epsilon,exists,sup_p,bound`.
    pub fn csv(&self) -> String {
        let mut out = String::from("epsilon,exists,sup_p,bound\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.epsilon, r.exists, json_float::fmt(r.sup_p), r.bound));
        }
        out
    }
}

/// `count` values from `hi` down to `lo`, equally spaced in `log ε`.
pub fn log_sweep(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_solution_meets_both_boundary_values() {
        let s = radial_shoot(2, 0.3, 1.0, 2.0, 1e-11).unwrap();
        assert!(s.miss.abs() <= 1e-11);
        assert!(s.k >= 0.0);
        let (lo, hi) = feasible_c(2, 0.3, 1.0, 2.0).unwrap();
        assert!(s.c >= lo && s.c <= hi);
        assert!(s.min_radicand >= -1e-12);
        assert!(s.profile.iter().all(|&(_, p)| p >= -1e-11));
        assert!(s.sup_p > 0.0);
        let at = s.height(s.t_max).unwrap();
        assert!((at - s.sup_p).abs() < 1e-14);
    }

    #[test]
    fn radial_profile_solves_the_operator_to_second_order() {
        // A mild case: the profile slope stays bounded on [1, 2].
        let (h, eps, outer) = (0.3, 1.0, 2.0);
        let s = radial_shoot(2, h, eps, outer, 1e-12).unwrap();
        let mut errs = Vec::new();
        for points in [41, 81, 161] {
            let mesh: Vec<f64> = (0..points).map(|i| eps + (outer - eps) * i as f64 / (points - 1) as f64).collect();
            let p = s.heights(&mesh).unwrap();
            // stay off the endpoints, where p' need not be bounded in general
            let r = radial_mc_residual(2, h, &mesh, &p);
            errs.push(r.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8 && order < 2.2, "{errs:?}");
        }
    }

    #[test]
    fn sweep_flips_to_nonexistence() {
        let mut flips = 0;
        let mut prev = true;
        for eps in [0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005] {
            let exists = match radial_shoot(2, 1.0, eps, 1.0, 1e-10) {
                Ok(s) => {
                    let bound = eps * (1.0 / eps as f64).acosh();
                    assert!(s.sup_p <= bound + 1e-9, "eps {eps}: {} > {bound}", s.sup_p);
                    true
                }
                Err(RadialError::Nonexistence { .. }) => false,
                Err(e) => panic!("{e}"),
            };
            if exists != prev {
                flips += 1;
            }
            prev = exists;
        }
        assert_eq!(flips, 1);
        assert!(!prev);
    }

    #[test]
    fn sweep_summary_brackets_the_threshold() {
        let eps = [0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
        let s = nonexistence_sweep(2, 1.0, 1.0, &eps, 1e-10).unwrap();
        assert_eq!(s.flips, 1);
        let (lo, hi) = s.epsilon_star.unwrap();
        assert!(lo < hi);
        assert!(s.rows.iter().all(|r| !r.exists || r.sup_p <= r.bound + 1e-9));
        assert!(s.csv().starts_with("epsilon,exists,sup_p,bound\n"));
        let ls = log_sweep(0.5, 0.005, 3);
        assert!((ls[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn heights_match_pointwise_evaluation() {
        let s = radial_shoot(3, 0.2, 0.5, 1.5, 1e-11).unwrap();
        let radii = [1.2, 0.6, 1.5, 0.5, 0.9];
        let hs = s.heights(&radii).unwrap();
        for (t, p) in radii.iter().zip(&hs) {
            assert!((s.height(*t).unwrap() - p).abs() < 1e-12);
        }
        assert!(s.heights(&[2.0]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(radial_shoot(2, 0.0, 0.5, 1.0, 1e-10).is_err());
        assert!(radial_shoot(2, 1.0, 1.0, 0.5, 1e-10).is_err());
        assert!(radial_shoot(1, 1.0, 0.5, 1.0, 1e-10).is_err());
    }
}
