//! Bracketed root finding: bisection to a narrow bracket, then a few Newton
//! steps that are only accepted while they stay inside the bracket.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("function is not finite at {at}")]
    NonFinite { at: f64 },
}

/// Finds the root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign. Bisects until the bracket is narrower than `width_tol * scale`, then
/// applies `newton_steps` Newton corrections using `df`.
pub fn bisect_newton<T, F, D>(
    f: F,
    df: D,
    mut lo: T,
    mut hi: T,
    width_tol: f64,
    newton_steps: usize,
) -> Result<T, RootError>
where
    T: Real,
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() {
        return Err(RootError::NonFinite { at: lo.to_f64_lossy() });
    }
    if !fhi.is_finite() {
        return Err(RootError::NonFinite { at: hi.to_f64_lossy() });
    }
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(RootError::NoSignChange {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let scale = lo.abs().max(hi.abs()).max(T::one());
    let width = T::floor_tol(width_tol, 4.0) * scale;
    while hi - lo > width {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = lo + (hi - lo) * T::lit(0.5);
    for _ in 0..newton_steps {
        let fx = f(x);
        let d = df(x);
        if fx == T::zero() || d == T::zero() || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= lo && next <= hi) || f(next).abs() > fx.abs() {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Plain bisection for a monotone predicate-like function when no derivative
/// is available. Terminates on `width_tol` absolute bracket width.
pub fn bisect<T, F>(f: F, mut lo: T, mut hi: T, width_tol: T, max_iter: usize) -> Result<T, RootError>
where
    T: Real,
    F: Fn(T) -> T,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(RootError::NoSignChange {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let lo_positive = flo > T::zero();
    for _ in 0..max_iter {
        if hi - lo <= width_tol {
            break;
        }
        let mid = lo + (hi - lo) * T::lit(0.5);
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_newton(|x: f64| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, 1e-14, 3).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reports_missing_bracket() {
        let r = bisect_newton(|x: f64| x * x + 1.0, |x| 2.0 * x, 0.0, 2.0, 1e-14, 3);
        assert!(matches!(r, Err(RootError::NoSignChange { .. })));
    }

    #[test]
    fn single_precision_root() {
        let r = bisect_newton(|x: f32| x * x * x - 8.0, |x| 3.0 * x * x, 0.0, 5.0, 1e-14, 3).unwrap();
        assert!((r - 2.0).abs() < 1e-5);
    }

    #[test]
    fn plain_bisection() {
        let r = bisect(|x: f64| x.cos() - x, 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r.cos() - r).abs() < 1e-13);
    }
}
