//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the kernels, quadrature and bounds are written against.
///
/// `num_traits::Float` covers arithmetic and elementary functions; the extra
/// method supplies the signed log-gamma function, which `num_traits` lacks.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Returns `(ln |Γ(self)|, sign Γ(self))`.
    fn ln_gamma_signed(self) -> (Self, i32);

    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded)
    /// in the supported types, so this never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }
}

impl Real for f64 {
    #[inline]
    fn ln_gamma_signed(self) -> (Self, i32) {
        libm::lgamma_r(self)
    }
}

impl Real for f32 {
    #[inline]
    fn ln_gamma_signed(self) -> (Self, i32) {
        libm::lgammaf_r(self)
    }
}

/// True when `v` is a negative integer (-1, -2, ...), where 1/Γ(v + 1) vanishes
/// and the power series for I has no leading term.
pub(crate) fn is_negative_integer<T: Real>(v: T) -> bool {
    v < T::zero() && v == v.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((5.0f64.ln_gamma_signed().0 - 24.0f64.ln()).abs() < 1e-14);
        assert!((0.5f64.ln_gamma_signed().0 - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-15);
        let (lg, s) = (-0.5f64).ln_gamma_signed();
        assert_eq!(s, -1);
        assert!((lg - (2.0 * std::f64::consts::PI.sqrt()).ln()).abs() < 1e-14);
        assert!((5.0f32.ln_gamma_signed().0 - 24.0f32.ln()).abs() < 1e-5);
    }

    #[test]
    fn negative_integer_detection() {
        assert!(is_negative_integer(-1.0f64));
        assert!(is_negative_integer(-7.0f64));
        assert!(!is_negative_integer(0.0f64));
        assert!(!is_negative_integer(-0.5f64));
        assert!(!is_negative_integer(3.0f64));
    }
}
