//! Rotationally symmetric catenoid (`h = 0`) and nodoid (`h > 0`) profiles.
//!
//! The profile `p` solves the first integral
//!
//! ```text
//! t^(n-1) p' / sqrt(1 + p'^2) = c - h t^n
//! ```
//!
//! of the radial constant-mean-curvature equation, so that `f(x) = p(|x|)`
//! has mean curvature `-h` over the annulus `r <= |x| <= R` with `p(r) = 0`.
//! The slope
//!
//! ```text
//! p'(t) = (c - h t^n) / sqrt(t^(2n-2) - (c - h t^n)^2)
//! ```
//!
//! is defined on `(a, b)` where `a`, `b` are the positive zeros of the
//! radicand. The radicand factors as `g1(t) * (-g2(t))` with
//! `g1(t) = h t^n + t^(n-1) - c` (zero at `a`) and
//! `g2(t) = h t^n - t^(n-1) - c` (zero at `b`), which is how it is evaluated
//! here: both factors are formed as differences of powers relative to their
//! root, so the integrand keeps full relative accuracy next to the
//! singular endpoints.

use serde::Serialize;
use thiserror::Error;

use crate::json_float;
use crate::quad::{self, QuadConfig, QuadError, Sample};
use crate::real::Real;
use crate::roots::{bisect_newton, RootError};

/// Inputs within this relative distance of the smallness bound are treated
/// as violating it.
pub const STRICTNESS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("parameter out of domain: {0}")]
    Parameter(String),
    #[error("c = {c} is outside the admissible interval ({lo}, {hi}]")]
    Inadmissible { c: f64, lo: f64, hi: f64 },
    #[error("t = {t} is outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("no admissible c: h = {h} is not below the smallness bound {bound}")]
    NoAdmissibleC { h: f64, bound: f64 },
    #[error("slope is unbounded at the inner radius (c at the upper admissible limit)")]
    VerticalStart,
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
}

pub type Result<T, E = BarrierError> = std::result::Result<T, E>;

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(BarrierError::Dimension(dim))
    } else {
        Ok(())
    }
}

/// `y^m - (y + delta)^m`'s negative, i.e. `(y + delta)^m - y^m`.
fn pow_step<T: Real>(y: T, delta: T, m: usize) -> T {
    if m == 0 {
        return T::zero();
    }
    y.powi(m as i32) * (T::from_int(m) * (delta / y).ln_1p()).exp_m1()
}

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// The radial integrand for fixed `(dim, h, c)` together with the zeros of
/// its radicand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileKernel<T> {
    pub dim: usize,
    pub h: T,
    pub c: T,
    pub a: T,
    /// `+inf` when `h = 0`.
    pub b: T,
}

impl<T: Real> ProfileKernel<T> {
    pub fn new(dim: usize, h: T, c: T) -> Result<Self> {
        let (a, b) = profile_zeros(dim, h, c)?;
        Ok(Self { dim, h, c, a, b })
    }

    fn n(&self) -> i32 {
        self.dim as i32
    }

    /// `k(t) = c - h t^n`.
    pub fn numerator(&self, t: T) -> T {
        self.c - self.h * t.powi(self.n())
    }

    /// Radicand `t^(2n-2) - k(t)^2` from exact distances to `a` and `b`.
    fn radicand(&self, from_a: T, from_b: T) -> T {
        let n = self.dim;
        let g1 = self.h * pow_step(self.a, from_a, n) + pow_step(self.a, from_a, n - 1);
        let minus_g2 = if self.b.is_finite() {
            // g2(b) - g2(b - from_b)
            -(self.h * pow_step(self.b, -from_b, n) - pow_step(self.b, -from_b, n - 1))
        } else {
            let t = self.a + from_a;
            t.powi(self.n() - 1) + self.c - self.h * t.powi(self.n())
        };
        g1 * minus_g2
    }

    fn integrand(&self, p: Sample<T>) -> T {
        self.numerator(p.s) / self.radicand(p.from_left, p.from_right).sqrt()
    }

    /// `p'(t)` on the open interval `(a, b)`.
    pub fn slope(&self, t: T) -> Result<T> {
        if !(t > self.a && t < self.b) {
            return Err(BarrierError::OutOfDomain {
                t: t.to_f64_lossy(),
                lo: self.a.to_f64_lossy(),
                hi: self.b.to_f64_lossy(),
            });
        }
        let from_b = if self.b.is_finite() { self.b - t } else { T::infinity() };
        Ok(self.integrand(Sample { s: t, from_left: t - self.a, from_right: from_b }))
    }

    fn zone(&self) -> T {
        if self.b.is_finite() {
            (self.b - self.a) * T::lit(0.1)
        } else {
            self.a * T::lit(0.1)
        }
    }

    /// `∫_lo^hi p'(s) ds` for `a <= lo <= hi <= b`, by Gauss–Kronrod after
    /// square-root substitution next to `a` and `b`.
    pub fn integrate(&self, lo: T, hi: T) -> Result<T> {
        let slack = T::floor_tol(1e-13, 8.0) * self.a.max(T::one());
        let lo = if lo < self.a && lo > self.a - slack { self.a } else { lo };
        let hi = if self.b.is_finite() && hi > self.b && hi < self.b + slack { self.b } else { hi };
        if hi < lo {
            return Ok(-self.integrate(hi, lo)?);
        }
        let right = if self.b.is_finite() { Some(self.b) } else { None };
        let r = quad::integrate_sqrt_singular(
            |p| self.integrand(p),
            lo,
            hi,
            self.a,
            right,
            self.zone(),
            &quad_cfg(),
        )?;
        Ok(r.value)
    }

    /// `∫_lo^∞ p'(s) ds` for a catenoid kernel (`h = 0`); finite for `dim >= 3`.
    pub fn integrate_to_infinity(&self, lo: T) -> Result<T> {
        if self.b.is_finite() || self.dim < 3 {
            return Err(BarrierError::Parameter(
                "improper profile integral needs h = 0 and dim >= 3".into(),
            ));
        }
        let split = (lo + lo).max(self.a + self.a);
        let head = self.integrate(lo, split)?;
        let tail = quad::integrate_to_infinity(
            |s: T| self.integrand(Sample { s, from_left: s - self.a, from_right: T::infinity() }),
            split,
            &quad_cfg(),
        )?;
        Ok(head + tail.value)
    }
}

/// Positive zeros `(a, b)` of the slope radicand.
///
/// `a` solves `h a^n + a^(n-1) = c`, `b` solves `h b^n - b^(n-1) = c`; for
/// `h = 0` the second zero does not exist and `b = +inf`.
pub fn profile_zeros<T: Real>(dim: usize, h: T, c: T) -> Result<(T, T)> {
    check_dim(dim)?;
    if !(c > T::zero()) || !c.is_finite() {
        return Err(BarrierError::Parameter(format!(
            "c must be positive (nodoid/catenoid branch), got {c}"
        )));
    }
    if !(h >= T::zero()) || !h.is_finite() {
        return Err(BarrierError::Parameter(format!("h must be nonnegative, got {h}")));
    }
    let n = dim as i32;
    let m = T::from_int(dim - 1);
    if h == T::zero() {
        let a = c.powf(T::one() / m);
        return Ok((a, T::infinity()));
    }
    let t0 = apex(dim, h, c)?;
    let g1 = |t: T| h * t.powi(n) + t.powi(n - 1) - c;
    let dg1 = |t: T| T::from_int(dim) * h * t.powi(n - 1) + m * t.powi(n - 2);
    let upper_a = t0.min(c.powf(T::one() / m));
    let a = bisect_newton(g1, dg1, T::zero(), upper_a, 1e-14, 3)?;

    let g2 = |t: T| h * t.powi(n) - t.powi(n - 1) - c;
    let dg2 = |t: T| T::from_int(dim) * h * t.powi(n - 1) - m * t.powi(n - 2);
    let lo_b = t0.max(T::one() / h);
    let mut hi_b = lo_b + lo_b;
    while g2(hi_b) <= T::zero() {
        hi_b = hi_b + hi_b;
        if !hi_b.is_finite() {
            return Err(BarrierError::Parameter("upper zero overflowed".into()));
        }
    }
    let b = bisect_newton(g2, dg2, lo_b, hi_b, 1e-14, 3)?;
    Ok((a, b))
}

/// Apex `t0 = (c/h)^(1/n)` where `p'(t0) = 0`; `+inf` for the catenoid.
pub fn apex<T: Real>(dim: usize, h: T, c: T) -> Result<T> {
    check_dim(dim)?;
    if !(c > T::zero()) {
        return Err(BarrierError::Parameter(format!("c must be positive, got {c}")));
    }
    if h < T::zero() {
        return Err(BarrierError::Parameter(format!("h must be nonnegative, got {h}")));
    }
    if h == T::zero() {
        return Ok(T::infinity());
    }
    Ok((c / h).powf(T::one() / T::from_int(dim)))
}

/// `p'(t)` for the kernel `(dim, h, c)`.
pub fn slope<T: Real>(t: T, dim: usize, h: T, c: T) -> Result<T> {
    ProfileKernel::new(dim, h, c)?.slope(t)
}

/// Admissible interval `(h r^n, h r^n + r^(n-1))` for `c`. For `h = 0` the
/// interval is `(0, r^(n-1))`.
pub fn admissible_c<T: Real>(dim: usize, h: T, r: T) -> (T, T) {
    let n = dim as i32;
    let lo = h * r.powi(n);
    (lo, lo + r.powi(n - 1))
}

/// `R'(c) = 2 (c/h)^(1/n) - r`, the radius up to which the profile stays
/// positive. The upper end of the admissible interval is accepted so the
/// limiting value can be evaluated.
pub fn usable_radius<T: Real>(dim: usize, h: T, r: T, c: T) -> Result<T> {
    check_dim(dim)?;
    if !(r > T::zero()) {
        return Err(BarrierError::Parameter(format!("r must be positive, got {r}")));
    }
    if h == T::zero() {
        return Ok(T::infinity());
    }
    let (lo, hi) = admissible_c(dim, h, r);
    if !(c > lo && c <= hi) {
        return Err(BarrierError::Inadmissible {
            c: c.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(apex(dim, h, c)? * T::lit(2.0) - r)
}

/// Supremum of `R'(c)` over admissible `c`: `2r (1 + 1/(h r))^(1/n) - r`.
pub fn sup_usable_radius<T: Real>(dim: usize, h: T, r: T) -> T {
    if h == T::zero() {
        return T::infinity();
    }
    let inv_n = T::one() / T::from_int(dim);
    T::lit(2.0) * r * (T::one() + T::one() / (h * r)).powf(inv_n) - r
}

/// Smallness bound `2 (2r)^(n-1) / ((R + r)^n - (2r)^n)` on `h` for a
/// positive barrier on `r <= t <= R`.
pub fn smallness_bound<T: Real>(dim: usize, r: T, outer: T) -> T {
    let n = dim as i32;
    let two_r = r + r;
    T::lit(2.0) * two_r.powi(n - 1) / ((outer + r).powi(n) - two_r.powi(n))
}

/// Strict check of `h` against [`smallness_bound`], with inputs grazing the
/// bound (relative distance below [`STRICTNESS`]) rejected.
pub fn satisfies_smallness<T: Real>(dim: usize, h: T, r: T, outer: T) -> bool {
    let bound = smallness_bound(dim, r, outer);
    h < bound * (T::one() - T::lit(STRICTNESS))
}

/// Chooses `c` for a barrier over `r <= t <= outer`.
///
/// For `h > 0`, `R'(c) = outer` is solved for `c*` and the midpoint between
/// `c*` and the upper end of the admissible interval is returned. For the
/// catenoid, `c = r^(n-1)/2`.
pub fn select_c<T: Real>(dim: usize, h: T, r: T, outer: T) -> Result<T> {
    check_dim(dim)?;
    if !(r > T::zero()) || !(outer > r) {
        return Err(BarrierError::Parameter(format!(
            "need 0 < r < R, got r = {r}, R = {outer}"
        )));
    }
    if h < T::zero() {
        return Err(BarrierError::Parameter(format!("h must be nonnegative, got {h}")));
    }
    let n = dim as i32;
    if h == T::zero() {
        return Ok(r.powi(n - 1) * T::lit(0.5));
    }
    if !satisfies_smallness(dim, h, r, outer) {
        return Err(BarrierError::NoAdmissibleC {
            h: h.to_f64_lossy(),
            bound: smallness_bound(dim, r, outer).to_f64_lossy(),
        });
    }
    // R'(c) = R  <=>  c = h ((R + r)/2)^n
    let c_star = h * ((outer + r) * T::lit(0.5)).powi(n);
    let (_, hi) = admissible_c(dim, h, r);
    Ok((c_star + hi) * T::lit(0.5))
}

/// A catenoid or nodoid profile with `p(r) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodoidProfile<T> {
    kernel: ProfileKernel<T>,
    r: T,
    t0: T,
    r_usable: T,
    outer: T,
}

impl<T: Real> NodoidProfile<T> {
    /// Profile for explicit `c` in the admissible interval; the upper end
    /// (where `a = r` and the slope is vertical at `r`) is included.
    pub fn new(dim: usize, h: T, r: T, c: T) -> Result<Self> {
        check_dim(dim)?;
        if !(r > T::zero()) || !r.is_finite() {
            return Err(BarrierError::Parameter(format!("r must be positive, got {r}")));
        }
        let (lo, hi) = admissible_c(dim, h, r);
        let hi_tol = hi * (T::one() + T::floor_tol(1e-15, 2.0));
        if !(c > lo && c <= hi_tol) {
            return Err(BarrierError::Inadmissible {
                c: c.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        let kernel = ProfileKernel::new(dim, h, c)?;
        let t0 = apex(dim, h, c)?;
        let r_usable = if h > T::zero() { t0 * T::lit(2.0) - r } else { T::infinity() };
        Ok(Self { kernel, r, t0, r_usable, outer: r_usable })
    }

    /// Barrier for the annulus `r <= |x| <= outer`, with `c` from [`select_c`].
    pub fn for_annulus(dim: usize, h: T, r: T, outer: T) -> Result<Self> {
        let c = select_c(dim, h, r, outer)?;
        let mut p = Self::new(dim, h, r, c)?;
        p.outer = outer;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim
    }
    pub fn h(&self) -> T {
        self.kernel.h
    }
    pub fn r(&self) -> T {
        self.r
    }
    pub fn c(&self) -> T {
        self.kernel.c
    }
    pub fn a(&self) -> T {
        self.kernel.a
    }
    pub fn b(&self) -> T {
        self.kernel.b
    }
    pub fn t0(&self) -> T {
        self.t0
    }
    pub fn r_usable(&self) -> T {
        self.r_usable
    }
    /// Outer radius of the annulus the profile was built for (`R_usable`
    /// unless built by [`NodoidProfile::for_annulus`]).
    pub fn outer(&self) -> T {
        self.outer
    }
    pub fn kernel(&self) -> &ProfileKernel<T> {
        &self.kernel
    }

    /// `b - δ_b` with `δ_b = 1e-12 (b - a)`.
    pub fn guarded_b(&self) -> T {
        let b = self.kernel.b;
        if b.is_finite() {
            b - (b - self.kernel.a) * T::lit(1e-12)
        } else {
            b
        }
    }

    fn domain_check(&self, t: T, hi: T) -> Result<()> {
        if t >= self.r && t <= hi && t.is_finite() {
            Ok(())
        } else {
            Err(BarrierError::OutOfDomain {
                t: t.to_f64_lossy(),
                lo: self.r.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            })
        }
    }

    pub fn slope(&self, t: T) -> Result<T> {
        self.kernel.slope(t)
    }

    /// `p(t)` for `r <= t <= min(R_usable, b - δ_b)`.
    ///
    /// The planar catenary uses `c arcosh(t/c) - c arcosh(r/c)`; everything
    /// else goes through [`NodoidProfile::height_quadrature`].
    pub fn height(&self, t: T) -> Result<T> {
        self.domain_check(t, self.r_usable.min(self.guarded_b()))?;
        if t == self.r {
            return Ok(T::zero());
        }
        if self.kernel.h == T::zero() && self.kernel.dim == 2 {
            let c = self.kernel.c;
            return Ok(c * ((t / c).acosh() - (self.r / c).acosh()));
        }
        self.height_quadrature(t)
    }

    /// `p(t)` by quadrature for any `t` in `[r, b - δ_b]`, including the part
    /// beyond `R_usable` where `p` may turn negative.
    pub fn height_quadrature(&self, t: T) -> Result<T> {
        self.domain_check(t, self.guarded_b())?;
        if t == self.r {
            return Ok(T::zero());
        }
        self.kernel.integrate(self.r, t)
    }

    /// `lim_{t→∞} p(t)` for the catenoid in dimension `>= 3`.
    pub fn height_at_infinity(&self) -> Result<T> {
        self.kernel.integrate_to_infinity(self.r)
    }

    /// `(C1, C2)`: `C1 = p(t0)` (or `p(outer)` for the catenoid, which is
    /// increasing), `C2 = |p'(r)|`.
    pub fn barrier_constants(&self) -> Result<(T, T)> {
        let c1 = if self.kernel.h > T::zero() {
            self.height(self.t0)?
        } else {
            if !self.outer.is_finite() {
                return Err(BarrierError::Parameter(
                    "catenoid barrier needs a finite outer radius".into(),
                ));
            }
            self.height(self.outer)?
        };
        if !(self.r > self.kernel.a) {
            return Err(BarrierError::VerticalStart);
        }
        let c2 = self.slope(self.r)?.abs();
        Ok((c1, c2))
    }

    /// Samples `(t, p, p')` on `points` uniformly spaced radii in `[r, upto]`.
    /// `upto` may exceed `R_usable` (up to `b - δ_b`); `p'` at `t = a` is
    /// reported as `+inf`.
    pub fn sample(&self, upto: T, points: usize) -> Result<Vec<(T, T, T)>> {
        let points = points.max(2);
        self.domain_check(upto, self.guarded_b())?;
        let step = (upto - self.r) / T::from_int(points - 1);
        (0..points)
            .map(|i| {
                let t = if i + 1 == points { upto } else { self.r + step * T::from_int(i) };
                let p = if t <= self.r_usable { self.height(t)? } else { self.height_quadrature(t)? };
                let dp = self.slope(t).unwrap_or_else(|_| {
                    if t <= self.kernel.a {
                        T::infinity()
                    } else {
                        T::neg_infinity()
                    }
                });
                Ok((t, p, dp))
            })
            .collect()
    }

    /// Parameter block including the barrier constants (non-finite values
    /// serialize as strings).
    pub fn params(&self) -> ProfileParams {
        let (c1, c2) = match self.barrier_constants() {
            Ok((c1, c2)) => (c1.to_f64_lossy(), c2.to_f64_lossy()),
            Err(BarrierError::VerticalStart) => (
                self.height(self.t0.min(self.outer)).map_or(f64::NAN, |v| v.to_f64_lossy()),
                f64::INFINITY,
            ),
            Err(_) => (f64::NAN, f64::NAN),
        };
        ProfileParams {
            dim: self.dim(),
            h: self.h().to_f64_lossy(),
            r: self.r.to_f64_lossy(),
            c: self.c().to_f64_lossy(),
            a: self.a().to_f64_lossy(),
            b: self.b().to_f64_lossy(),
            t0: self.t0.to_f64_lossy(),
            r_usable: self.r_usable.to_f64_lossy(),
            c1,
            c2,
        }
    }
}

/// JSON parameter block of a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileParams {
    pub dim: usize,
    pub h: f64,
    pub r: f64,
    pub c: f64,
    pub a: f64,
    #[serde(serialize_with = "json_float::serialize")]
    pub b: f64,
    #[serde(serialize_with = "json_float::serialize")]
    pub t0: f64,
    #[serde(rename = "R_usable", serialize_with = "json_float::serialize")]
    pub r_usable: f64,
    #[serde(rename = "C1", serialize_with = "json_float::serialize")]
    pub c1: f64,
    #[serde(rename = "C2", serialize_with = "json_float::serialize")]
    pub c2: f64,
}

/// CSV with header `t,p,p_prime`.
pub fn profile_csv<T: Real>(rows: &[(T, T, T)]) -> String {
    let mut out = String::from("t,p,p_prime\n");
    for (t, p, dp) in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            json_float::fmt(t.to_f64_lossy()),
            json_float::fmt(p.to_f64_lossy()),
            json_float::fmt(dp.to_f64_lossy())
        ));
    }
    out
}
