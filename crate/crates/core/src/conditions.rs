//! Existence, smallness and nonexistence conditions, the curvature field
//! abstraction, and the aggregated verdict ledger.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barrier::{self, BarrierError, NodoidProfile};
use crate::geometry::{BoundarySample, DomainSpec, GeometryError, Point};
use crate::json_float;
use crate::quad::{self, QuadConfig, QuadError};
use crate::real::Real;
use crate::solver::radial;

#[derive(Debug, Error)]
pub enum ConditionError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no boundary samples supplied")]
    NoSamples,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub type Result<T, E = ConditionError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        }
    }

    pub fn strict<T: PartialOrd>(actual: T, bound: T) -> Self {
        if actual < bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn non_strict<T: PartialOrd>(actual: T, bound: T) -> Self {
        if actual <= bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    ExistenceGuaranteed,
    NecessaryConditionViolated,
    Indeterminate,
}

impl Overall {
    pub fn as_str(self) -> &'static str {
        match self {
            Overall::ExistenceGuaranteed => "existence-guaranteed",
            Overall::NecessaryConditionViolated => "necessary-condition-violated",
            Overall::Indeterminate => "indeterminate",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Overall::ExistenceGuaranteed => 0,
            Overall::NecessaryConditionViolated => 2,
            Overall::Indeterminate => 3,
        }
    }
}

/// Volume of the unit ball in `R^dim`, `π^(n/2) / Γ(n/2 + 1)`, using the
/// half-integer recursion for the gamma function.
pub fn unit_ball_volume<T: Real>(dim: usize) -> T {
    let pi = T::PI();
    // Γ(n/2 + 1)
    let gamma = if dim % 2 == 0 {
        (1..=dim / 2).fold(T::one(), |acc, k| acc * T::from_int(k))
    } else {
        // Γ(k + 1/2) with k = (n + 1)/2
        let k = dim.div_ceil(2);
        (0..k).fold(pi.sqrt(), |acc, j| acc * (T::from_int(j) + T::lit(0.5)))
    };
    let half = T::from_int(dim) * T::lit(0.5);
    pi.powf(half) / gamma
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(ConditionError::Parameter(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

/// Annulus smallness: `h < 2(2r)^(n-1) / ((2r + d)^n - (2r)^n)`, strict.
pub fn check_annulus_smallness<T: Real>(dim: usize, r: T, d: T, h: T) -> Result<(T, Verdict)> {
    check_dim(dim)?;
    if !(r > T::zero() && d > T::zero()) {
        return Err(ConditionError::Parameter(format!("need r > 0 and d > 0, got r = {r}, d = {d}")));
    }
    let bound = barrier::smallness_bound(dim, r, r + d);
    Ok((bound, Verdict::strict(h, bound)))
}

/// Volume smallness: `h < (ω_n / |Ω|)^(1/n)`, strict.
pub fn check_volume_smallness<T: Real>(dim: usize, volume: T, h: T) -> Result<(T, Verdict)> {
    check_dim(dim)?;
    if !(volume > T::zero()) {
        return Err(ConditionError::Parameter(format!("volume must be positive, got {volume}")));
    }
    let bound = (unit_ball_volume::<T>(dim) / volume).powf(T::one() / T::from_int(dim));
    Ok((bound, Verdict::strict(h, bound)))
}

/// Strip smallness for convex domains of width `d`: `h < 2/(n d)`, strict.
pub fn check_strip_smallness<T: Real>(dim: usize, d: T, h: T, convex: bool) -> Result<(T, Verdict)> {
    check_dim(dim)?;
    if !(d > T::zero()) {
        return Err(ConditionError::Parameter(format!("strip width must be positive, got {d}")));
    }
    let bound = T::lit(2.0) / (T::from_int(dim) * d);
    if !convex {
        return Ok((bound, Verdict::NotApplicable));
    }
    Ok((bound, Verdict::strict(h, bound)))
}

/// Inscribed-disc necessary condition `h <= 1/ρ`.
pub fn check_inscribed_disc<T: Real>(dim: usize, rho: T, h: T) -> Result<(T, Verdict)> {
    check_dim(dim)?;
    if !(rho > T::zero() && h >= T::zero()) {
        return Err(ConditionError::Parameter(format!("need rho > 0 and h >= 0, got rho = {rho}, h = {h}")));
    }
    let bound = T::one() / rho;
    Ok((bound, Verdict::non_strict(h, bound)))
}

/// Mean convexity `|H(x, z)| <= (n-1)/n Ĥ(x)` at every boundary sample for
/// `z` on `z_samples` points of `z_range`.
///
/// Returns the largest excess `|H| - (n-1)/n Ĥ` (nonpositive iff pass) with
/// the verdict.
pub fn check_mean_convexity(
    dim: usize,
    samples: &[BoundarySample],
    field: &CurvatureField,
    z_range: (f64, f64),
    z_samples: usize,
) -> Result<(f64, Verdict)> {
    check_dim(dim)?;
    if samples.is_empty() {
        return Err(ConditionError::NoSamples);
    }
    let zs = linspace(z_range.0, z_range.1, z_samples.max(1));
    let factor = (dim as f64 - 1.0) / dim as f64;
    let mut excess = f64::NEG_INFINITY;
    for s in samples {
        for &z in &zs {
            excess = excess.max(field.eval(s.point, z).abs() - factor * s.hhat);
        }
    }
    Ok((excess, Verdict::non_strict(excess, 0.0)))
}

/// Upper bound on the height of the radial solution over `{ε < |x| < 1}`
/// with constant curvature one: `ε arcosh(1/ε)` in the plane and
/// `ε ∫_1^(1/ε) dτ / sqrt(τ^(2n-2) - 1)` in general.
pub fn nonexistence_height_bound<T: Real>(dim: usize, epsilon: T) -> Result<T> {
    check_dim(dim)?;
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(ConditionError::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let inv = epsilon.recip();
    if dim == 2 {
        return Ok(epsilon * inv.acosh());
    }
    let m = T::from_int(2 * dim - 2);
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 4000 };
    let r = quad::integrate_sqrt_singular(
        // τ^m - 1 = expm1(m ln1p(τ - 1)), accurate next to τ = 1
        |p| (m * p.from_left.ln_1p()).exp_m1().sqrt().recip(),
        T::one(),
        inv,
        T::one(),
        None,
        T::lit(0.1) * (inv - T::one()).min(T::one()),
        &cfg,
    )?;
    Ok(epsilon * r.value)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Tabulated `H(x, y, z)` on a regular grid, trilinear inside and clamped
/// outside. A single z layer makes the field independent of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTable {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    /// `[nx, ny, nz]`; values are indexed `(iz * ny + iy) * nx + ix`.
    pub shape: [usize; 3],
    pub values: Vec<f64>,
}

impl CurvatureTable {
    fn validate(&self) -> Result<()> {
        let [nx, ny, nz] = self.shape;
        if nx < 2 || ny < 2 || nz < 1 {
            return Err(ConditionError::Parameter("table needs at least 2x2x1 nodes".into()));
        }
        if self.values.len() != nx * ny * nz {
            return Err(ConditionError::Parameter(format!(
                "table has {} values, expected {}",
                self.values.len(),
                nx * ny * nz
            )));
        }
        let axes = if nz > 1 { 3 } else { 2 };
        if self.spacing[..axes].iter().any(|&s| !(s > 0.0)) {
            return Err(ConditionError::Parameter("table spacing must be positive".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ConditionError::Parameter("table values must be finite".into()));
        }
        Ok(())
    }

    /// Cell index, local coordinate and whether the coordinate was clamped.
    fn locate(&self, axis: usize, x: f64) -> (usize, f64, bool) {
        let n = self.shape[axis];
        if n == 1 {
            return (0, 0.0, true);
        }
        let u = (x - self.origin[axis]) / self.spacing[axis];
        let max = (n - 1) as f64;
        let clamped = !(0.0..=max).contains(&u);
        let u = u.clamp(0.0, max);
        let i = (u.floor() as usize).min(n - 2);
        (i, u - i as f64, clamped)
    }

    fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let [nx, ny, _] = self.shape;
        self.values[(iz * ny + iy) * nx + ix]
    }

    fn eval_grad(&self, x: Point, z: f64) -> (f64, [f64; 2], f64) {
        let (ix, u, cx) = self.locate(0, x[0]);
        let (iy, v, cy) = self.locate(1, x[1]);
        let (iz, w, cz) = self.locate(2, z);
        let layers = if self.shape[2] > 1 { 2 } else { 1 };
        let mut corner = [[[0.0; 2]; 2]; 2];
        for (a, plane) in corner.iter_mut().enumerate() {
            for (b, row) in plane.iter_mut().enumerate() {
                for (c, val) in row.iter_mut().enumerate() {
                    let kz = if layers == 2 { iz + a } else { 0 };
                    *val = self.at(ix + c, iy + b, kz);
                }
            }
        }
        let bil = |pl: &[[f64; 2]; 2]| {
            let lo = pl[0][0] + u * (pl[0][1] - pl[0][0]);
            let hi = pl[1][0] + u * (pl[1][1] - pl[1][0]);
            let val = lo + v * (hi - lo);
            let du = (1.0 - v) * (pl[0][1] - pl[0][0]) + v * (pl[1][1] - pl[1][0]);
            let dv = hi - lo;
            (val, du, dv)
        };
        let (f0, du0, dv0) = bil(&corner[0]);
        let (val, du, dv, dz) = if layers == 2 {
            let (f1, du1, dv1) = bil(&corner[1]);
            (
                f0 + w * (f1 - f0),
                du0 + w * (du1 - du0),
                dv0 + w * (dv1 - dv0),
                (f1 - f0) / self.spacing[2],
            )
        } else {
            (f0, du0, dv0, 0.0)
        };
        let gx = if cx { 0.0 } else { du / self.spacing[0] };
        let gy = if cy { 0.0 } else { dv / self.spacing[1] };
        let gz = if cz { 0.0 } else { dz };
        (val, [gx, gy], gz)
    }
}

/// JSON form of a curvature field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureSpec {
    /// `H ≡ h`.
    Constant { h: f64 },
    /// `H = h + hz·z`.
    Affine { h: f64, hz: f64 },
    Table(CurvatureTable),
}

impl CurvatureSpec {
    pub fn to_field(&self) -> Result<CurvatureField> {
        match self {
            CurvatureSpec::Constant { h } => CurvatureField::constant(*h),
            CurvatureSpec::Affine { h, hz } => CurvatureField::affine(*h, *hz),
            CurvatureSpec::Table(t) => CurvatureField::table(t.clone()),
        }
    }
}

type EvalFn = dyn Fn(Point, f64) -> f64 + Send + Sync;
type GradFn = dyn Fn(Point, f64) -> ([f64; 2], f64) + Send + Sync;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Affine(f64, f64),
    Table(Arc<CurvatureTable>),
    Custom { eval: Arc<EvalFn>, grad: Arc<GradFn>, z_independent: bool },
}

/// Prescribed curvature `H(x, z)` with its gradient `(∇ₓH, H_z)`.
#[derive(Clone)]
pub struct CurvatureField {
    kind: Kind,
}

impl std::fmt::Debug for CurvatureField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            Kind::Constant(h) => write!(f, "CurvatureField::Constant({h})"),
            Kind::Affine(h, hz) => write!(f, "CurvatureField::Affine({h} + {hz} z)"),
            Kind::Table(t) => write!(f, "CurvatureField::Table({:?})", t.shape),
            Kind::Custom { .. } => write!(f, "CurvatureField::Custom"),
        }
    }
}

impl CurvatureField {
    pub fn constant(h: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(ConditionError::Parameter(format!("curvature must be finite, got {h}")));
        }
        Ok(Self { kind: Kind::Constant(h) })
    }

    pub fn zero() -> Self {
        Self { kind: Kind::Constant(0.0) }
    }

    pub fn affine(h: f64, hz: f64) -> Result<Self> {
        if !(h.is_finite() && hz.is_finite()) {
            return Err(ConditionError::Parameter("affine coefficients must be finite".into()));
        }
        Ok(Self { kind: Kind::Affine(h, hz) })
    }

    pub fn table(table: CurvatureTable) -> Result<Self> {
        table.validate()?;
        Ok(Self { kind: Kind::Table(Arc::new(table)) })
    }

    /// Arbitrary field with an analytic gradient.
    pub fn from_fn<E, G>(eval: E, grad: G, z_independent: bool) -> Self
    where
        E: Fn(Point, f64) -> f64 + Send + Sync + 'static,
        G: Fn(Point, f64) -> ([f64; 2], f64) + Send + Sync + 'static,
    {
        Self { kind: Kind::Custom { eval: Arc::new(eval), grad: Arc::new(grad), z_independent } }
    }

    pub fn eval(&self, x: Point, z: f64) -> f64 {
        match &self.kind {
            Kind::Constant(h) => *h,
            Kind::Affine(h, hz) => h + hz * z,
            Kind::Table(t) => t.eval_grad(x, z).0,
            Kind::Custom { eval, .. } => eval(x, z),
        }
    }

    /// `(∇ₓH, H_z)`.
    pub fn grad(&self, x: Point, z: f64) -> ([f64; 2], f64) {
        match &self.kind {
            Kind::Constant(_) => ([0.0, 0.0], 0.0),
            Kind::Affine(_, hz) => ([0.0, 0.0], *hz),
            Kind::Table(t) => {
                let (_, g, gz) = t.eval_grad(x, z);
                (g, gz)
            }
            Kind::Custom { grad, .. } => grad(x, z),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(h) => Some(h),
            Kind::Affine(h, hz) if hz == 0.0 => Some(h),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }

    pub fn is_z_independent(&self) -> bool {
        match &self.kind {
            Kind::Constant(_) => true,
            Kind::Affine(_, hz) => *hz == 0.0,
            Kind::Table(t) => t.shape[2] == 1,
            Kind::Custom { z_independent, .. } => *z_independent,
        }
    }

    /// Samples the slab `points × [-z_max, z_max]`.
    pub fn summarize(&self, points: &[Point], z_max: f64, z_samples: usize) -> CurvatureSummary {
        let zs = linspace(-z_max.abs(), z_max.abs(), z_samples.max(2) | 1);
        let mut s = CurvatureSummary {
            h_sup0: 0.0,
            h0: 0.0,
            min_hz: f64::INFINITY,
            monotone: true,
            inf_abs: f64::INFINITY,
            sign_definite: true,
            z_max: z_max.abs(),
        };
        let mut sign = 0.0f64;
        for &x in points {
            s.h_sup0 = s.h_sup0.max(self.eval(x, 0.0).abs());
            for &z in &zs {
                let v = self.eval(x, z);
                let (g, gz) = self.grad(x, z);
                s.h0 = s.h0.max(v.abs() + (g[0] * g[0] + g[1] * g[1] + gz * gz).sqrt());
                s.min_hz = s.min_hz.min(gz);
                s.inf_abs = s.inf_abs.min(v.abs());
                if v != 0.0 {
                    if sign == 0.0 {
                        sign = v.signum();
                    } else if v.signum() != sign {
                        s.sign_definite = false;
                    }
                }
            }
        }
        if points.is_empty() {
            s.min_hz = 0.0;
            s.inf_abs = 0.0;
        }
        if !s.sign_definite {
            s.inf_abs = 0.0;
        }
        s.monotone = s.min_hz >= -1e-12;
        s
    }
}

/// Sampled bounds of a curvature field over a working slab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSummary {
    /// `sup |H(x, 0)|`.
    pub h_sup0: f64,
    /// `sup (|H| + |∇H|)` over the slab.
    pub h0: f64,
    pub min_hz: f64,
    /// `H_z >= -1e-12` at every sample.
    pub monotone: bool,
    /// `inf |H|` over the slab if `H` keeps one sign, else zero.
    pub inf_abs: f64,
    pub sign_definite: bool,
    pub z_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    #[serde(serialize_with = "json_float::serialize")]
    pub bound: f64,
    #[serde(serialize_with = "json_float::serialize")]
    pub actual: f64,
    pub verdict: Verdict,
    pub citation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub overall: Overall,
    pub checks: Vec<CheckEntry>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Boundary data mode of the problem being assessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `f = 0` on the boundary.
    #[default]
    Zero,
    /// All boundary values: the mean-convexity test becomes necessary.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssessOptions {
    pub dim: usize,
    pub boundary: BoundaryMode,
    /// Samples per boundary component for the mean-convexity test.
    pub boundary_samples: usize,
    /// Half-height of the working slab; defaults to the barrier height when
    /// the annulus test passes and to 1 otherwise.
    pub z_max: Option<f64>,
    pub z_samples: usize,
    /// Domain sampling density per axis for curvature bounds.
    pub domain_samples: usize,
}

impl Default for AssessOptions {
    fn default() -> Self {
        Self { dim: 2, boundary: BoundaryMode::Zero, boundary_samples: 256, z_max: None, z_samples: 9, domain_samples: 64 }
    }
}

/// Sample points covering the domain: a regular grid of interior points plus
/// boundary samples where available.
pub fn domain_sample_points(domain: &DomainSpec, per_axis: usize, boundary_samples: usize) -> Vec<Point> {
    let (lo, hi) = domain.bounding_box();
    let n = per_axis.max(2);
    let mut pts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64,
            ];
            if domain.contains(p) {
                pts.push(p);
            }
        }
    }
    if let Ok(b) = domain.boundary_mean_curvature(boundary_samples) {
        pts.extend(b.into_iter().map(|s| s.point));
    }
    pts
}

fn entry(name: &str, bound: f64, actual: f64, verdict: Verdict, citation: &str) -> CheckEntry {
    CheckEntry { name: name.into(), bound, actual, verdict, citation: citation.into(), note: None }
}

/// Runs every applicable check and aggregates the overall verdict.
pub fn assess(domain: &DomainSpec, field: &CurvatureField, opts: &AssessOptions) -> Result<ConditionReport> {
    check_dim(opts.dim)?;
    domain.validate()?;
    let dim = opts.dim;
    let points = domain_sample_points(domain, opts.domain_samples, opts.boundary_samples);
    let h = field.summarize(&points, 0.0, 1).h_sup0;
    let mut checks = Vec::new();

    // annulus smallness, for domains with a finite exterior sphere radius
    let ext = domain.exterior_sphere_radius()?;
    let mut annulus_pass = false;
    let mut barrier_height = None;
    if ext.value.is_finite() {
        let fit = domain.annulus_fit(ext.value)?;
        let (bound, verdict) = check_annulus_smallness(dim, fit.r, fit.d, h)?;
        let mut e = entry(
            "annulus_smallness",
            bound,
            h,
            verdict,
            "existence for zero boundary values: sup|H(x,0)| below the nodoid bound of the enclosing annulus",
        );
        e.note = Some(format!(
            "r = {}, d = {}, translation = ({}, {}){}",
            fit.r,
            fit.d,
            fit.translation[0],
            fit.translation[1],
            if ext.approximate { "; exterior radius is a bitmap estimate" } else { "" }
        ));
        annulus_pass = verdict == Verdict::Pass;
        if annulus_pass && h > 0.0 {
            if let Ok(profile) = NodoidProfile::for_annulus(dim, h, fit.r, fit.r + fit.d) {
                barrier_height = profile.barrier_constants().ok().map(|(c1, _)| c1);
            }
        }
        checks.push(e);
    } else {
        let mut e = entry(
            "annulus_smallness",
            f64::NAN,
            h,
            Verdict::NotApplicable,
            "existence for zero boundary values via an enclosing annulus",
        );
        e.note = Some("convex domain: exterior spheres of every radius; see strip_smallness".into());
        checks.push(e);
    }

    let (bound, verdict) = check_volume_smallness(dim, domain.volume(), h)?;
    let mut e = entry(
        "volume_smallness",
        bound,
        h,
        verdict,
        "height bound by the volume of the domain: sup|H(x,0)| below (omega_n/|domain|)^(1/n)",
    );
    e.note = Some("informational: does not by itself give existence".into());
    checks.push(e);

    let mut strip_pass = false;
    match domain.strip_width() {
        Some(d) => {
            let (bound, verdict) = check_strip_smallness(dim, d, h, domain.is_convex())?;
            strip_pass = verdict == Verdict::Pass;
            checks.push(entry(
                "strip_smallness",
                bound,
                h,
                verdict,
                "existence for convex domains in a strip of width d: sup|H(x,0)| below 2/(n d)",
            ));
        }
        None => checks.push(entry(
            "strip_smallness",
            f64::NAN,
            h,
            Verdict::NotApplicable,
            "existence for convex domains in a strip",
        )),
    }

    let z_max = opts.z_max.or(barrier_height).unwrap_or(1.0);
    let summary = field.summarize(&points, z_max, opts.z_samples);

    let rho = domain.inscribed_disc_radius();
    let inscribed_fail = if field.is_z_independent() && rho > 0.0 {
        let (bound, verdict) = check_inscribed_disc(dim, rho, summary.inf_abs)?;
        checks.push(entry(
            "inscribed_disc",
            bound,
            summary.inf_abs,
            verdict,
            "necessary condition: a graph of curvature at least h over a disc of radius rho needs h <= 1/rho",
        ));
        verdict == Verdict::Fail
    } else {
        let mut e = entry("inscribed_disc", f64::NAN, summary.inf_abs, Verdict::NotApplicable, "necessary condition h <= 1/rho");
        e.note = Some("curvature depends on the height".into());
        checks.push(e);
        false
    };

    let mut convexity_fail = false;
    match domain.boundary_mean_curvature(opts.boundary_samples) {
        Ok(samples) if !samples.is_empty() => {
            let (excess, verdict) =
                check_mean_convexity(dim, &samples, field, (-z_max, z_max), opts.z_samples)?;
            let mut e = entry(
                "mean_convexity",
                0.0,
                excess,
                verdict,
                "solvability for all boundary values: |H(x,z)| <= (n-1)/n times the boundary mean curvature",
            );
            match opts.boundary {
                BoundaryMode::Zero => e.note = Some("informational for zero boundary values".into()),
                BoundaryMode::General => convexity_fail = verdict == Verdict::Fail,
            }
            if matches!(domain, DomainSpec::ConvexPolygon { .. }) {
                let extra = "polygon corners are not sampled";
                e.note = Some(match e.note.take() {
                    Some(n) => format!("{n}; {extra}"),
                    None => extra.into(),
                });
            }
            checks.push(e);
        }
        _ => {
            let mut e = entry("mean_convexity", 0.0, f64::NAN, Verdict::NotApplicable, "boundary mean convexity");
            e.note = Some("boundary curvature is not defined for bitmap domains".into());
            checks.push(e);
        }
    }

    let mut e = entry(
        "monotonicity",
        0.0,
        summary.min_hz,
        if summary.monotone { Verdict::Pass } else { Verdict::Fail },
        "H nondecreasing in z, required for the gradient estimate and uniqueness",
    );
    e.note = Some(format!("sampled on |z| <= {z_max}; h0 = sup(|H| + |grad H|) = {}", summary.h0));
    checks.push(e);

    if let (DomainSpec::Annulus { r_in, r_out }, Some(hc), BoundaryMode::Zero) =
        (domain, field.constant_value(), opts.boundary)
    {
        if hc != 0.0 {
            let found = radial::radial_shoot(dim, hc.abs(), *r_in, *r_out, 1e-10);
            let (actual, verdict, note) = match &found {
                Ok(sol) => (sol.sup_p, Verdict::Pass, "rotationally symmetric solution found".to_string()),
                Err(radial::RadialError::Nonexistence { .. }) => {
                    (f64::NAN, Verdict::Fail, "no admissible shooting constant".to_string())
                }
                Err(other) => (f64::NAN, Verdict::NotApplicable, other.to_string()),
            };
            let mut e = entry(
                "radial_shooting",
                f64::NAN,
                actual,
                verdict,
                "rotationally symmetric solution on the annulus by shooting on the integration constant",
            );
            e.note = Some(format!("{note}; informational"));
            checks.push(e);
        }
    }

    let overall = if inscribed_fail || convexity_fail {
        Overall::NecessaryConditionViolated
    } else if summary.monotone
        && (annulus_pass || strip_pass)
        && !domain.is_approximate()
        && opts.boundary == BoundaryMode::Zero
    {
        Overall::ExistenceGuaranteed
    } else {
        Overall::Indeterminate
    };
    Ok(ConditionReport { overall, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn annulus_smallness_examples() {
        let (b, v) = check_annulus_smallness(2, 1.0, 1.0, 0.3).unwrap();
        assert!((b - 0.8f64).abs() < 1e-15);
        assert_eq!(v, Verdict::Pass);
        assert_eq!(check_annulus_smallness(2, 1.0, 1.0, 0.8).unwrap().1, Verdict::Fail);
        let (b, _) = check_annulus_smallness(3, 1.0, 2.0, 0.0).unwrap();
        assert!((b - 1.0f64 / 7.0).abs() < 1e-15);
        assert!(check_annulus_smallness(2, 1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn volume_smallness_examples() {
        let pi = std::f64::consts::PI;
        let (b, v) = check_volume_smallness(2, pi, 0.5).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
        assert_eq!(v, Verdict::Pass);
        let (b, v) = check_volume_smallness(2, 4.0 * pi, 0.6).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
        assert_eq!(v, Verdict::Fail);
        let (b, _) = check_volume_smallness(3, 4.0 / 3.0 * pi * 8.0, 0.0).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_ball_volumes() {
        let pi = std::f64::consts::PI;
        let known = [(2, pi), (3, 4.0 / 3.0 * pi), (4, pi * pi / 2.0), (5, 8.0 * pi * pi / 15.0)];
        for (n, v) in known {
            assert!((unit_ball_volume::<f64>(n) - v).abs() < 1e-14 * v, "n = {n}");
        }
        assert!((unit_ball_volume::<f32>(3) - 4.18879).abs() < 1e-5);
    }

    #[test]
    fn strip_smallness_examples() {
        assert_eq!(check_strip_smallness(2, 1.0, 0.9, true).unwrap(), (1.0, Verdict::Pass));
        assert_eq!(check_strip_smallness(2, 1.0, 1.0, true).unwrap(), (1.0, Verdict::Fail));
        assert_eq!(check_strip_smallness(2, 1.0, 0.1, false).unwrap().1, Verdict::NotApplicable);
    }

    #[test]
    fn strip_bound_is_the_large_radius_limit() {
        for dim in 2..=4 {
            for d in [0.5, 1.0, 3.0] {
                let annulus = check_annulus_smallness(dim, 1e6f64, d, 0.0).unwrap().0;
                let strip = check_strip_smallness(dim, d as f64, 0.0, true).unwrap().0;
                assert!((annulus - strip).abs() <= 1e-6 * strip.max(1.0), "{dim} {d}: {annulus} vs {strip}");
            }
        }
    }

    #[test]
    fn inscribed_disc_examples() {
        assert_eq!(check_inscribed_disc(2, 1.0, 1.0).unwrap().1, Verdict::Pass);
        assert_eq!(check_inscribed_disc(2, 2.0, 1.0).unwrap().1, Verdict::Fail);
        assert_eq!(check_inscribed_disc(2, 1e-300, 1e10).unwrap().1, Verdict::Pass);
    }

    #[test]
    fn mean_convexity_examples() {
        let disc = DomainSpec::disc(2.0);
        let samples = disc.boundary_mean_curvature(64).unwrap();
        // bound (n-1)/(n R) = 0.25
        let pass = CurvatureField::constant(0.25).unwrap();
        let fail = CurvatureField::constant(0.2501).unwrap();
        assert_eq!(check_mean_convexity(2, &samples, &pass, (-1.0, 1.0), 5).unwrap().1, Verdict::Pass);
        assert_eq!(check_mean_convexity(2, &samples, &fail, (-1.0, 1.0), 5).unwrap().1, Verdict::Fail);

        let ring = DomainSpec::annulus(1.0, 2.0).boundary_mean_curvature(32).unwrap();
        let tiny = CurvatureField::constant(1e-6).unwrap();
        assert_eq!(check_mean_convexity(2, &ring, &tiny, (0.0, 0.0), 1).unwrap().1, Verdict::Fail);

        let square = DomainSpec::rectangle(1.0, 1.0).boundary_mean_curvature(16).unwrap();
        assert_eq!(
            check_mean_convexity(2, &square, &CurvatureField::zero(), (-1.0, 1.0), 3).unwrap().1,
            Verdict::Pass
        );
        assert!(matches!(
            check_mean_convexity(2, &[], &CurvatureField::zero(), (0.0, 0.0), 1),
            Err(ConditionError::NoSamples)
        ));
    }

    #[test]
    fn nonexistence_bound_values() {
        // 0.1 * ln(10 + sqrt(99)), mpmath
        let b2: f64 = nonexistence_height_bound(2, 0.1).unwrap();
        assert!((b2 - 0.2993222846126380898).abs() < 1e-15);
        let near_one: f64 = nonexistence_height_bound(2, 1.0 - 1e-12).unwrap();
        assert!(near_one.abs() < 1e-5);
        // 0.1 * ∫_1^10 dτ / sqrt(τ^4 - 1), mpmath
        let b3: f64 = nonexistence_height_bound(3, 0.1).unwrap();
        assert!((b3 - 0.1211027777104390835).abs() < 1e-12, "{b3}");
        // below ε times the improper integral 1.3110287771460599
        assert!(b3 < 0.1 * 1.311028777146059905);
        assert!(nonexistence_height_bound::<f64>(2, 1.0).is_err());
        assert!(nonexistence_height_bound::<f64>(3, 0.0).is_err());
    }

    #[test]
    fn nonexistence_bound_decreases_to_zero() {
        for dim in 2..=4 {
            let mut prev = f64::INFINITY;
            for k in 1..=6 {
                let b: f64 = nonexistence_height_bound(dim, 10f64.powi(-k)).unwrap();
                assert!(b < prev, "dim {dim}, k {k}");
                prev = b;
            }
            assert!(prev < 1e-4);
        }
    }

    #[test]
    fn disjoint_smallness_fixtures() {
        // Found by a parameter search over r, d, h in the plane.
        // Thin annulus: the annulus test passes while the volume test fails.
        let (r, d, h) = (1.0, 0.1, 5.0);
        let vol = std::f64::consts::PI * ((r + d) * (r + d) - r * r);
        assert_eq!(check_annulus_smallness(2, r, d, h).unwrap().1, Verdict::Pass);
        assert_eq!(check_volume_smallness(2, vol, h).unwrap().1, Verdict::Fail);
        // Wide annulus with a small hole: the reverse.
        let (r, d, h) = (0.1, 10.0, 0.05);
        let vol = std::f64::consts::PI * ((r + d) * (r + d) - r * r);
        assert_eq!(check_annulus_smallness(2, r, d, h).unwrap().1, Verdict::Fail);
        assert_eq!(check_volume_smallness(2, vol, h).unwrap().1, Verdict::Pass);
    }

    #[test]
    fn curvature_summary_examples() {
        let pts = domain_sample_points(&DomainSpec::disc(1.0), 16, 16);
        let z = CurvatureField::affine(0.0, 1.0).unwrap();
        let s = z.summarize(&pts, 1.0, 5);
        assert!((s.h0 - 2.0).abs() < 1e-12);
        assert!(s.monotone);
        let c = CurvatureField::constant(-0.7).unwrap();
        let s = c.summarize(&pts, 1.0, 5);
        assert_eq!(s.h0, 0.7);
        assert_eq!(s.h_sup0, 0.7);
        assert_eq!(s.inf_abs, 0.7);
        let dec = CurvatureField::affine(0.0, -1.0).unwrap();
        assert!(!dec.summarize(&pts, 1.0, 5).monotone);
    }

    #[test]
    fn table_field_is_trilinear() {
        // H = 1 + 2x + 3y + 4z sampled exactly
        let mut values = Vec::new();
        for iz in 0..2 {
            for iy in 0..3 {
                for ix in 0..3 {
                    values.push(1.0 + 2.0 * ix as f64 * 0.5 + 3.0 * iy as f64 * 0.5 + 4.0 * iz as f64);
                }
            }
        }
        let t = CurvatureTable { origin: [0.0, 0.0, 0.0], spacing: [0.5, 0.5, 1.0], shape: [3, 3, 2], values };
        let f = CurvatureField::table(t).unwrap();
        let (x, z) = ([0.3, 0.7], 0.25);
        assert!((f.eval(x, z) - (1.0 + 0.6 + 2.1 + 1.0)).abs() < 1e-14);
        let (g, gz) = f.grad(x, z);
        assert!((g[0] - 2.0).abs() < 1e-14 && (g[1] - 3.0).abs() < 1e-14 && (gz - 4.0).abs() < 1e-14);
        // clamped outside
        assert!((f.eval([-1.0, 0.0], 0.0) - 1.0).abs() < 1e-14);
        assert_eq!(f.grad([-1.0, 0.0], 0.0).0[0], 0.0);
    }

    #[test]
    fn curvature_spec_json() {
        let s: CurvatureSpec = serde_json::from_str(r#"{"kind":"constant","h":-0.3}"#).unwrap();
        assert_eq!(s.to_field().unwrap().constant_value(), Some(-0.3));
        let s: CurvatureSpec = serde_json::from_str(r#"{"kind":"affine","h":0.1,"hz":2}"#).unwrap();
        let f = s.to_field().unwrap();
        assert_eq!(f.eval([0.0, 0.0], 1.0), 2.1);
        let bad = r#"{"kind":"table","origin":[0,0,0],"spacing":[1,1,1],"shape":[2,2,1],"values":[1]}"#;
        let s: CurvatureSpec = serde_json::from_str(bad).unwrap();
        assert!(s.to_field().is_err());
    }

    #[test]
    fn assess_annulus_pass() {
        let rep = assess(&DomainSpec::annulus(1.0, 2.0), &CurvatureField::constant(-0.3).unwrap(), &AssessOptions::default())
            .unwrap();
        assert_eq!(rep.overall, Overall::ExistenceGuaranteed);
        let a = rep.get("annulus_smallness").unwrap();
        assert!((a.bound - 0.8).abs() < 1e-14);
        assert_eq!(rep.get("mean_convexity").unwrap().verdict, Verdict::Fail);
        assert_eq!(rep.get("radial_shooting").unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn assess_thin_annulus_violation() {
        let rep = assess(&DomainSpec::annulus(1.0, 1.1), &CurvatureField::constant(25.0).unwrap(), &AssessOptions::default())
            .unwrap();
        assert_eq!(rep.get("annulus_smallness").unwrap().verdict, Verdict::Fail);
        assert_eq!(rep.get("inscribed_disc").unwrap().verdict, Verdict::Fail);
        assert_eq!(rep.overall, Overall::NecessaryConditionViolated);
        assert_eq!(rep.overall.exit_code(), 2);
    }

    #[test]
    fn assess_convex_strip() {
        let rep = assess(&DomainSpec::rectangle(10.0, 1.0), &CurvatureField::constant(0.9).unwrap(), &AssessOptions::default())
            .unwrap();
        assert_eq!(rep.get("strip_smallness").unwrap().verdict, Verdict::Pass);
        assert_eq!(rep.overall, Overall::ExistenceGuaranteed);
        let rep = assess(&DomainSpec::rectangle(10.0, 1.0), &CurvatureField::constant(1.5).unwrap(), &AssessOptions::default())
            .unwrap();
        assert_eq!(rep.overall, Overall::Indeterminate);
    }

    #[test]
    fn assess_general_boundary_mode_uses_mean_convexity() {
        let opts = AssessOptions { boundary: BoundaryMode::General, ..Default::default() };
        let rep = assess(&DomainSpec::annulus(1.0, 2.0), &CurvatureField::constant(-0.3).unwrap(), &opts).unwrap();
        assert_eq!(rep.overall, Overall::NecessaryConditionViolated);
        let rep = assess(&DomainSpec::disc(1.0), &CurvatureField::constant(0.4).unwrap(), &opts).unwrap();
        assert_eq!(rep.overall, Overall::Indeterminate);
    }

    #[test]
    fn report_json_shape() {
        let rep = assess(&DomainSpec::disc(1.0), &CurvatureField::constant(0.4).unwrap(), &AssessOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["overall"], "existence-guaranteed");
        let first = &v["checks"][0];
        for key in ["name", "bound", "actual", "verdict", "citation"] {
            assert!(first.get(key).is_some(), "{key}");
        }
    }

    proptest! {
        #[test]
        fn annulus_bound_monotone(dim in 2usize..5, r in 0.05f64..20.0, d in 0.05f64..20.0, f in 1.001f64..3.0) {
            let base = check_annulus_smallness(dim, r, d, 0.0).unwrap().0;
            let wider = check_annulus_smallness(dim, r, d * f, 0.0).unwrap().0;
            let bigger_hole = check_annulus_smallness(dim, r * f, d, 0.0).unwrap().0;
            prop_assert!(wider < base);
            prop_assert!(bigger_hole > base);
        }

        #[test]
        fn verdicts_respect_strictness(dim in 2usize..5, r in 0.1f64..5.0, d in 0.1f64..5.0) {
            let (b, _) = check_annulus_smallness(dim, r, d, 0.0).unwrap();
            prop_assert_eq!(check_annulus_smallness(dim, r, d, b).unwrap().1, Verdict::Fail);
            prop_assert_eq!(check_inscribed_disc(dim, r, 1.0 / r).unwrap().1, Verdict::Pass);
        }
    }
}
