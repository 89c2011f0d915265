//! Scalar abstraction shared by the one-dimensional numerics.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used by the quadrature, root finding, barrier and
/// condition code. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an integer into the scalar type.
    #[inline]
    fn from_int(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }

    /// Lossy conversion to `f64`, used for reports and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(tol, k * machine epsilon)`: keeps tolerances meaningful in `f32`.
    #[inline]
    fn floor_tol(tol: f64, k: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(k))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x^m - y^m` for positive `x`, `y`, accurate when `x` and `y` are close.
pub fn pow_diff<T: Real>(x: T, y: T, m: usize) -> T {
    if m == 0 {
        return T::zero();
    }
    let mm = T::from_int(m);
    let rel = (x - y) / y;
    y.powi(m as i32) * (mm * rel.ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_diff_matches_direct_when_far_apart() {
        let d: f64 = pow_diff(3.0, 2.0, 3);
        assert!((d - 19.0).abs() < 1e-12);
        assert_eq!(pow_diff(3.0_f64, 2.0, 0), 0.0);
    }

    #[test]
    fn pow_diff_keeps_relative_accuracy_near_coincidence() {
        // (1 + 1e-13)^4 - 1 = 4e-13 + O(1e-26)
        let d: f64 = pow_diff(1.0 + 1e-13, 1.0, 4);
        let exact = 4.0 * ((1.0 + 1e-13) - 1.0);
        assert!(((d - exact) / exact).abs() < 1e-9);
    }
}
