//! Modified Bessel functions `I_ν(x)` and `K_ν(x)` of real order and
//! nonnegative argument, returned in log-scaled form.
//!
//! `I_ν` uses the ascending power series, switching to the large-argument
//! expansion once `x ≥ 35` and `x ≥ ν²`, where that expansion converges to
//! machine precision within a few dozen terms. Its exponentially small companion
//! is below `e^{-70}` relative, so it is dropped. Failing that, the series
//! is used at any `x`. It has no cancellation for `ν > -1` and costs `O(x)` terms.
//!
//! `K_ν` integrates `∫₀^∞ e^{-x cosh t} cosh(νt) dt` with the trapezoidal
//! rule. The integrand is even and decays double-exponentially, so the rule
//! converges geometrically in the step size.

use crate::error::{domain, Error, Result};
use crate::real::{is_negative_integer, Real};
use crate::scaled::Scaled;

/// Smallest argument for which the large-argument expansion of `I_ν` is tried.
pub const ASYMPTOTIC_MIN_X: f64 = 35.0;

const SERIES_MAX_TERMS: usize = 50_000;
const ASYMPTOTIC_MAX_TERMS: usize = 80;
const RATIO_MAX_TERMS: usize = 200_000;
const K_MAX_HALVINGS: usize = 16;

/// `I_order(x)` for real `order` and `x ≥ 0`.
///
/// Negative integer orders are rejected. `x = 0` returns the series limit:
/// one for order zero and zero for positive orders.
pub fn besseli<T: Real>(order: T, x: T) -> Result<Scaled<T>> {
    if !order.is_finite() {
        return Err(domain(format!("order must be finite, got {order}")));
    }
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(domain(format!("I requires finite x >= 0, got x = {x}")));
    }
    if is_negative_integer(order) {
        return Err(Error::InvalidOrder {
            order: order.to_f64().unwrap_or(f64::NAN),
        });
    }
    if x == T::zero() {
        return if order == T::zero() {
            Ok(Scaled::one())
        } else if order > T::zero() {
            Ok(Scaled::zero())
        } else {
            Err(domain(format!("I_{order}(0) is unbounded for negative order")))
        };
    }
    if x >= T::lit(ASYMPTOTIC_MIN_X) && x >= order * order {
        if let Some(v) = besseli_asymptotic(order, x) {
            return Ok(v);
        }
    }
    besseli_series(order, x)
}

/// Ascending series `Σ (x/2)^{ν+2k} / (Γ(ν+k+1) k!)`, summed relative to its
/// first term and rescaled whenever the partial sum grows large.
fn besseli_series<T: Real>(order: T, x: T) -> Result<Scaled<T>> {
    let half = x / T::lit(2.0);
    let (lg, gamma_sign) = (order + T::one()).ln_gamma_signed();
    let log_first = order * half.ln() - lg;
    let q = half * half;
    let eps = T::epsilon();
    let big = T::max_value().sqrt();
    let log_big = big.ln();

    let mut sum = T::one();
    let mut term = T::one();
    let mut log_offset = T::zero();
    for k in 1..SERIES_MAX_TERMS {
        let kf = T::of_usize(k);
        term = term * q / (kf * (order + kf));
        sum = sum + term;
        if sum.abs() > big {
            sum = sum / big;
            term = term / big;
            log_offset = log_offset + log_big;
        }
        let next_shrinks = q < (kf + T::one()) * (order + kf + T::one());
        if next_shrinks && term.abs() <= T::lit(0.5) * eps * sum.abs() {
            let sign = gamma_sign.signum() as i8 * if sum < T::zero() { -1 } else { 1 };
            if sum == T::zero() {
                return Ok(Scaled::zero());
            }
            return Ok(Scaled::from_signed_log(sign, log_first + log_offset + sum.abs().ln()));
        }
    }
    Err(Error::NonConvergence {
        operation: "besseli power series",
        detail: format!("order {order}, x {x}"),
    })
}

/// `e^x / √(2πx) · Σ (-1)^k a_k(ν) / x^k`; `None` if the terms stop
/// shrinking before reaching machine precision.
fn besseli_asymptotic<T: Real>(order: T, x: T) -> Option<Scaled<T>> {
    let mu4 = T::lit(4.0) * order * order;
    let eps = T::epsilon();
    let mut sum = T::one();
    let mut term = T::one();
    for k in 1..ASYMPTOTIC_MAX_TERMS {
        let kf = T::of_usize(k);
        let odd = T::lit(2.0) * kf - T::one();
        let next = -term * (mu4 - odd * odd) / (T::lit(8.0) * kf * x);
        if next.abs() > term.abs() && k > 1 {
            return None;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= T::lit(0.5) * eps * sum.abs() {
            if sum <= T::zero() {
                return None;
            }
            let log = x - T::lit(0.5) * (T::TAU() * x).ln() + sum.ln();
            return Some(Scaled::from_log(log));
        }
    }
    None
}

/// `K_order(x)` for real `order` and `x > 0`; even in `order`.
pub fn besselk<T: Real>(order: T, x: T) -> Result<Scaled<T>> {
    if !order.is_finite() {
        return Err(domain(format!("order must be finite, got {order}")));
    }
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("K requires finite x > 0, got x = {x}")));
    }
    let a = order.abs();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    // log of e^{x} e^{-x cosh t} cosh(a t)
    let log_integrand = |t: T| {
        let s = (t * half).sinh();
        -two * x * s * s + a * t + ((T::one() + (-two * a * t).exp()) * half).ln()
    };
    let t_peak = (a / x).asinh();
    let sp = (t_peak * half).sinh();
    let shift = -two * x * sp * sp + a * t_peak;
    let cut = T::lit(2.5) * -T::epsilon().ln();

    let mut t_end = t_peak + T::one();
    while log_integrand(t_end) - shift > -cut {
        t_end = t_peak + two * (t_end - t_peak);
    }
    let f = |t: T| (log_integrand(t) - shift).exp();

    let mut n: usize = 32;
    let mut h = t_end / T::of_usize(n);
    let mut sum = half * f(T::zero());
    for k in 1..=n {
        sum = sum + f(T::of_usize(k) * h);
    }
    let mut estimate = h * sum;
    for _ in 0..K_MAX_HALVINGS {
        let h_new = h * half;
        for k in 0..n {
            sum = sum + f(T::of_usize(2 * k + 1) * h_new);
        }
        n *= 2;
        h = h_new;
        let refined = h * sum;
        let change = (refined - estimate).abs();
        estimate = refined;
        if change <= T::lit(16.0) * T::epsilon() * refined {
            return Ok(Scaled::from_log(shift - x + estimate.ln()));
        }
    }
    Err(Error::NonConvergence {
        operation: "besselk trapezoidal rule",
        detail: format!("order {order}, x {x}"),
    })
}

/// `I_{ν+1}(x) / I_ν(x)` by the Gauss continued fraction
/// `1 / (2(ν+1)/x + 1 / (2(ν+2)/x + ...))`, evaluated with Lentz's method.
///
/// Requires `ν > -1` (all partial denominators positive) and `x > 0`.
pub fn besseli_ratio<T: Real>(nu: T, x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("ratio requires finite x > 0, got x = {x}")));
    }
    if !(nu > -T::one()) || !nu.is_finite() {
        return Err(domain(format!("ratio requires nu > -1, got nu = {nu}")));
    }
    let two_over_x = T::lit(2.0) / x;
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = (nu + T::one()) * two_over_x;
    let mut c = f;
    let mut d = T::zero();
    for k in 2..RATIO_MAX_TERMS {
        let b = (nu + T::of_usize(k)) * two_over_x;
        d = b + d;
        if d == T::zero() {
            d = tiny;
        }
        d = d.recip();
        c = b + c.recip();
        if c == T::zero() {
            c = tiny;
        }
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= eps {
            return Ok(f.recip());
        }
    }
    Err(Error::NonConvergence {
        operation: "besseli_ratio continued fraction",
        detail: format!("nu {nu}, x {x}"),
    })
}

/// `[I_ν(x), I_{ν+1}(x), …, I_{ν+count-1}(x)]`.
///
/// The top ratio comes from the continued fraction; lower ratios from the
/// downward recurrence `I_{m-1}/I_m = 2m/x + I_{m+1}/I_m`, which is stable
/// in that direction. The ladder is anchored on `I_ν` from [`besseli`].
pub fn besseli_ladder<T: Real>(nu: T, x: T, count: usize) -> Result<Vec<Scaled<T>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(nu > -T::one()) {
        return Err(domain(format!("ladder requires nu > -1, got nu = {nu}")));
    }
    if !(x > T::zero()) {
        return Err(domain(format!("ladder requires x > 0, got x = {x}")));
    }
    let mut out = Vec::with_capacity(count);
    out.push(besseli(nu, x)?);
    if count == 1 {
        return Ok(out);
    }
    // ratios[i] = I_{ν+i+1} / I_{ν+i}
    let mut ratios = vec![T::zero(); count - 1];
    ratios[count - 2] = besseli_ratio(nu + T::of_usize(count - 2), x)?;
    for i in (1..count - 1).rev() {
        let m = nu + T::of_usize(i);
        ratios[i - 1] = (T::lit(2.0) * m / x + ratios[i]).recip();
    }
    for r in ratios {
        let last = *out.last().expect("ladder is nonempty");
        out.push(last * Scaled::from_value(r));
    }
    Ok(out)
}

/// Two-term small-argument form `(x/2)^ν / Γ(ν+1) · (1 + x² / (4(ν+1)))`.
pub fn asym_small<T: Real>(order: T, x: T) -> Result<T> {
    if is_negative_integer(order) {
        return Err(Error::InvalidOrder {
            order: order.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(x >= T::zero()) {
        return Err(domain(format!("asym_small requires x >= 0, got x = {x}")));
    }
    let correction = T::one() + x * x / (T::lit(4.0) * (order + T::one()));
    if x == T::zero() {
        return Ok(if order == T::zero() { T::one() } else { T::zero() });
    }
    let (lg, sign) = (order + T::one()).ln_gamma_signed();
    let lead = (order * (x / T::lit(2.0)).ln() - lg).exp();
    Ok(T::lit(f64::from(sign.signum())) * lead * correction)
}

/// Two-term large-argument form `e^x / √(2πx) · (1 - (4ν² - 1) / (8x))`.
pub fn asym_large<T: Real>(order: T, x: T) -> Result<Scaled<T>> {
    if !(x > T::zero()) {
        return Err(domain(format!("asym_large requires x > 0, got x = {x}")));
    }
    let lead = Scaled::from_log(x - T::lit(0.5) * (T::TAU() * x).ln());
    let factor = T::one() - (T::lit(4.0) * order * order - T::one()) / (T::lit(8.0) * x);
    Ok(lead.scale(factor))
}
