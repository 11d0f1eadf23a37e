//! Sign and log-magnitude representation of reals.
//!
//! Integrals of `e^{-γt} t^μ I(t)` grow like `e^{(1-γ)x}`, which leaves the
//! `f64` range near `x ≈ 710`. Every exponentially large quantity in the crate
//! travels as a [`Scaled`] so products and quotients stay exact in log space
//! and sums never overflow.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::real::Real;

/// A real number stored as `sign · exp(log_abs)`.
///
/// `sign` is `-1`, `0` or `+1`. Zero is stored with `log_abs = 0` so the
/// representation is canonical (and serializable, unlike `-∞`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaled<T> {
    sign: i8,
    log_abs: T,
}

impl<T: Real> Scaled<T> {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            log_abs: T::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            sign: 1,
            log_abs: T::zero(),
        }
    }

    /// Builds from parts; `None` if `sign ∉ {-1,0,1}` or a nonzero value has a
    /// non-finite log.
    pub fn from_parts(sign: i8, log_abs: T) -> Option<Self> {
        match sign {
            0 => Some(Self::zero()),
            -1 | 1 if log_abs.is_finite() => Some(Self { sign, log_abs }),
            _ => None,
        }
    }

    /// Positive value `exp(log)`. A log of `-∞` gives zero.
    pub fn from_log(log: T) -> Self {
        if log == T::neg_infinity() {
            Self::zero()
        } else {
            debug_assert!(log.is_finite(), "from_log with non-finite log {log:?}");
            Self { sign: 1, log_abs: log }
        }
    }

    pub fn from_signed_log(sign: i8, log: T) -> Self {
        if sign == 0 || log == T::neg_infinity() {
            Self::zero()
        } else {
            debug_assert!(log.is_finite());
            Self {
                sign: sign.signum(),
                log_abs: log,
            }
        }
    }

    pub fn from_value(v: T) -> Self {
        if v == T::zero() {
            Self::zero()
        } else {
            debug_assert!(v.is_finite(), "from_value with non-finite {v:?}");
            Self {
                sign: if v > T::zero() { 1 } else { -1 },
                log_abs: v.abs().ln(),
            }
        }
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn log_abs(&self) -> T {
        self.log_abs
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    #[inline]
    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// The plain value; overflows to `±∞` when `log_abs` exceeds the type's range.
    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            1 => self.log_abs.exp(),
            _ => -self.log_abs.exp(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    /// Multiplies by a plain real.
    pub fn scale(&self, factor: T) -> Self {
        *self * Self::from_value(factor)
    }

    /// `self^p` for a positive value.
    pub fn powf(&self, p: T) -> Self {
        match self.sign {
            0 => Self::zero(),
            _ => {
                debug_assert!(self.sign > 0, "powf of a negative scaled value");
                Self::from_log(self.log_abs * p)
            }
        }
    }

    /// `self / other` as a plain real. Panics if `other` is zero.
    pub fn ratio(&self, other: &Self) -> T {
        assert!(!other.is_zero(), "ratio with zero denominator");
        if self.is_zero() {
            return T::zero();
        }
        let r = (self.log_abs - other.log_abs).exp();
        if self.sign == other.sign {
            r
        } else {
            -r
        }
    }

    /// Relative difference `(self - reference) / reference`, accurate when the
    /// two are close because it goes through `expm1` of the log difference.
    pub fn rel_diff(&self, reference: &Self) -> T {
        assert!(!reference.is_zero(), "relative difference against zero");
        if self.is_zero() {
            return -T::one();
        }
        let d = self.log_abs - reference.log_abs;
        if self.sign == reference.sign {
            d.exp_m1()
        } else {
            -(T::one() + d.exp())
        }
    }

    /// Total order on the represented values.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.log_abs.partial_cmp(&other.log_abs).unwrap_or(Ordering::Equal),
                _ => other.log_abs.partial_cmp(&self.log_abs).unwrap_or(Ordering::Equal),
            },
            ord => ord,
        }
    }
}

impl<T: Real> Default for Scaled<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> PartialOrd for Scaled<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl<T: Real> Mul for Scaled<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs + rhs.log_abs,
        }
    }
}

impl<T: Real> Div for Scaled<T> {
    type Output = Self;
    /// Panics on division by zero.
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division of scaled value by zero");
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs - rhs.log_abs,
        }
    }
}

impl<T: Real> Neg for Scaled<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl<T: Real> Add for Scaled<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.log_abs >= rhs.log_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let delta = small.log_abs - big.log_abs;
        if big.sign == small.sign {
            Self {
                sign: big.sign,
                log_abs: big.log_abs + delta.exp().ln_1p(),
            }
        } else {
            // |big| - |small| = |big| (1 - e^delta), delta <= 0
            let rest = -delta.exp_m1();
            if rest <= T::zero() {
                Self::zero()
            } else {
                Self {
                    sign: big.sign,
                    log_abs: big.log_abs + rest.ln(),
                }
            }
        }
    }
}

impl<T: Real> Sub for Scaled<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Sum for Scaled<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, v| acc + v)
    }
}

impl<T: Real> fmt::Display for Scaled<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let v = self.value();
                if v.is_finite() {
                    write!(f, "{v}")
                } else {
                    write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.log_abs)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = Scaled<f64>;

    #[test]
    fn zero_is_canonical() {
        assert_eq!(S::from_value(0.0), S::zero());
        assert_eq!(S::from_log(f64::NEG_INFINITY), S::zero());
        assert_eq!(S::from_parts(0, 12.0).unwrap(), S::zero());
        assert!(S::from_parts(2, 0.0).is_none());
        assert!(S::from_parts(1, f64::INFINITY).is_none());
    }

    #[test]
    fn arithmetic_matches_plain_values() {
        let a = S::from_value(3.5);
        let b = S::from_value(-1.25);
        assert!(((a + b).value() - 2.25).abs() < 1e-15);
        assert!(((a - b).value() - 4.75).abs() < 1e-15);
        assert!(((b - a).value() + 4.75).abs() < 1e-15);
        assert!(((a * b).value() + 4.375).abs() < 1e-15);
        assert!(((a / b).value() + 2.8).abs() < 1e-15);
        assert_eq!(a - a, S::zero());
        assert!((a.ratio(&b) + 2.8).abs() < 1e-15);
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let e1000 = S::from_log(1000.0);
        let sum = e1000 + e1000;
        assert!((sum.log_abs() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let diff = S::from_log(1000.0) - S::from_log(999.0);
        assert!((diff.log_abs() - (1000.0 + (1.0 - (-1f64).exp()).ln())).abs() < 1e-12);
        assert!(e1000.value().is_infinite());
        assert!(e1000.to_string().starts_with("exp("));
    }

    #[test]
    fn rel_diff_resolves_tiny_gaps() {
        let a = S::from_log(0.5);
        let b = S::from_log(0.5 + 1e-14);
        assert!((b.rel_diff(&a) - 1e-14).abs() < 1e-16);
        assert!((S::from_value(-2.0).rel_diff(&S::from_value(1.0)) + 3.0).abs() < 1e-15);
        assert_eq!(S::zero().rel_diff(&a), -1.0);
        let far = S::from_log(700.0);
        // resolution near log 700 is one ulp of 700, about 1.1e-13 relative
        assert!((far.scale(1.0 + 1e-12).rel_diff(&far) - 1e-12).abs() < 2e-13);
    }

    #[test]
    fn ordering() {
        let vals = [-5.0, -0.1, 0.0, 1e-300, 2.0, 7.0];
        for (i, x) in vals.iter().enumerate() {
            for (j, y) in vals.iter().enumerate() {
                assert_eq!(S::from_value(*x).cmp_value(&S::from_value(*y)), i.cmp(&j));
            }
        }
    }

    #[test]
    #[should_panic(expected = "division of scaled value by zero")]
    fn division_by_zero_panics() {
        let _ = S::one() / S::zero();
    }
}
