//! Numerical evaluation of `F(μ, ord, γ, x) = ∫₀ˣ e^{-γt} t^μ I_ord(t) dt`.
//!
//! The range is split at `ε = min(1, x/2)`. On `[0, ε]` the integrand is
//! expanded as a double power series (Bessel series times exponential series)
//! and integrated term by term. This handles the `t^{μ+ord}` singularity at the
//! origin exactly. On `[ε, x]` adaptive Gauss–Kronrod runs on the integrand
//! divided by its largest sampled value, so the `e^{(1-γ)x}` growth is carried
//! in log space.
//!
//! The module also holds the closed forms used to check the oracle: the exact
//! antiderivative at `γ = 1`, the two-term large-`x` expansion, and residuals
//! of integration identities that connect integrals of neighbouring orders.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::bessel::{besseli, besselk};
use crate::error::{domain, Error, Result};
use crate::quad::integrate_adaptive;
use crate::real::{is_negative_integer, Real};
use crate::scaled::Scaled;

/// Panel budget of the adaptive quadrature.
pub const MAX_PANELS: usize = 10_000;
/// Tolerance used where an operation calls the oracle without taking one.
pub const DEFAULT_TOL: f64 = 1e-13;
pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-6;

const SERIES_MAX_TERMS: usize = 400;
const SCALE_SAMPLES: usize = 17;

/// One member of the integral family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec<T> {
    /// Power of `t`.
    pub mu: T,
    /// Bessel order.
    pub ord: T,
    /// Exponential tilt; `γ = 1` is admitted for the closed-form cross-check.
    pub gamma: T,
    /// Upper limit.
    pub x: T,
}

impl<T: Real> IntegralSpec<T> {
    pub fn new(mu: T, ord: T, gamma: T, x: T) -> Self {
        Self { mu, ord, gamma, x }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { mu, ord, gamma, x } = *self;
        if !(mu.is_finite() && ord.is_finite() && gamma.is_finite() && x.is_finite()) {
            return Err(domain("integral parameters must be finite"));
        }
        if !(mu + ord > -T::one()) {
            return Err(domain(format!(
                "integral requires mu + ord > -1 (integrable at 0), got mu = {mu}, ord = {ord}"
            )));
        }
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(domain(format!(
                "integral requires 0 <= gamma <= 1, got gamma = {gamma}"
            )));
        }
        if !(x >= T::zero()) {
            return Err(domain(format!("integral requires x >= 0, got x = {x}")));
        }
        if is_negative_integer(ord) {
            return Err(Error::InvalidOrder {
                order: ord.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Oracle value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult<T> {
    pub value: Scaled<T>,
    /// Estimated absolute error: embedded Kronrod–Gauss differences summed
    /// over panels, plus roundoff of the series segment.
    pub abs_err: Scaled<T>,
    /// Number of adaptive panels on `[ε, x]`.
    pub segments: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    /// `abs_err / |value|`; zero for an exactly zero integral.
    pub fn rel_err(&self) -> T {
        if self.value.is_zero() {
            T::zero()
        } else {
            self.abs_err.ratio(&self.value.abs())
        }
    }
}

/// Accepted tolerance range for the scalar type: `[1e-13, 1e-6]`, raised
/// for types whose epsilon makes the lower end unreachable.
pub fn tol_range<T: Real>() -> (T, T) {
    let lo = T::lit(MIN_TOL).max(T::lit(16.0) * T::epsilon());
    let hi = T::lit(MAX_TOL).max(lo * T::lit(10.0));
    (lo, hi)
}

pub(crate) fn check_tol<T: Real>(tol: T) -> Result<()> {
    let (lo, hi) = tol_range::<T>();
    if tol >= lo && tol <= hi {
        Ok(())
    } else {
        Err(domain(format!("tolerance {tol} outside [{lo}, {hi}]")))
    }
}

/// Clamps a tolerance into the accepted range.
pub fn clamp_tol<T: Real>(tol: T) -> T {
    let (lo, hi) = tol_range::<T>();
    tol.max(lo).min(hi)
}

/// `∫₀ˣ e^{-γt} t^μ I_ord(t) dt` to relative accuracy `tol`.
pub fn bessel_integral<T: Real>(spec: &IntegralSpec<T>, tol: T) -> Result<QuadResult<T>> {
    spec.validate()?;
    check_tol(tol)?;
    let x = spec.x;
    if x == T::zero() {
        return Ok(QuadResult {
            value: Scaled::zero(),
            abs_err: Scaled::zero(),
            segments: 0,
            converged: true,
        });
    }
    let split = T::one().min(x * T::lit(0.5));
    let (head, head_err) = series_segment(spec, split)?;

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let log_integrand = |t: T| -> (i8, T) {
        match besseli(spec.ord, t) {
            Ok(i) => (i.sign(), -spec.gamma * t + spec.mu * t.ln() + i.log_abs()),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                (0, T::zero())
            }
        }
    };
    let mut scale = T::neg_infinity();
    for k in 0..SCALE_SAMPLES {
        let t = split + (x - split) * T::of_usize(k) / T::of_usize(SCALE_SAMPLES - 1);
        let (s, l) = log_integrand(t);
        if s != 0 {
            scale = scale.max(l);
        }
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    if !scale.is_finite() {
        scale = T::zero();
    }
    let tail = integrate_adaptive(
        |t| {
            let (s, l) = log_integrand(t);
            T::lit(f64::from(s)) * (l - scale).exp()
        },
        split,
        x,
        tol * T::lit(0.5),
        MAX_PANELS,
        1,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !tail.converged {
        return Err(Error::NonConvergence {
            operation: "bessel_integral adaptive quadrature",
            detail: format!(
                "mu {}, ord {}, gamma {}, x {}: {} panels, relative error estimate {}",
                spec.mu,
                spec.ord,
                spec.gamma,
                x,
                tail.panels,
                tail.abs_err / tail.value.abs()
            ),
        });
    }
    let scale = Scaled::from_log(scale);
    let value = head + Scaled::from_value(tail.value) * scale;
    let abs_err = head_err + Scaled::from_value(tail.abs_err) * scale;
    let converged = value.is_zero() || abs_err.ratio(&value.abs()) <= tol;
    Ok(QuadResult {
        value,
        abs_err,
        segments: tail.panels,
        converged,
    })
}

/// `∫₀^ε e^{-γt} t^μ I_ord(t) dt` by integrating the product series
/// `Σ_m c_m t^{μ+ord+m}` term by term, with
/// `c_m = Σ_{2k+j=m} (1/2)^{ord+2k} / (Γ(ord+k+1) k!) · (-γ)^j / j!`.
/// Returns the value and a roundoff estimate.
fn series_segment<T: Real>(spec: &IntegralSpec<T>, eps_x: T) -> Result<(Scaled<T>, Scaled<T>)> {
    let IntegralSpec { mu, ord, gamma, .. } = *spec;
    let p = mu + ord;
    let quarter = T::lit(0.25);
    let (lg, gamma_sign) = (ord + T::one()).ln_gamma_signed();
    let log_lead = -ord * T::LN_2() - lg + (p + T::one()) * eps_x.ln();

    // alpha[k] = Γ(ord+1) (1/4)^k / (Γ(ord+k+1) k!), beta[j] = (-γ)^j / j!
    let mut alpha: Vec<T> = vec![T::one()];
    let mut beta: Vec<T> = vec![T::one()];
    let mut sum = T::zero();
    let mut abs_sum = T::zero();
    let mut eps_pow = T::one();
    let mut prev_small = false;
    for m in 0..SERIES_MAX_TERMS {
        if m > 0 {
            let mf = T::of_usize(m);
            beta.push(beta[m - 1] * (-gamma) / mf);
            if m % 2 == 0 {
                let k = T::of_usize(m / 2);
                let last = *alpha.last().expect("alpha nonempty");
                alpha.push(last * quarter / (k * (ord + k)));
            }
            eps_pow = eps_pow * eps_x;
        }
        let mut c = T::zero();
        for (k, a) in alpha.iter().enumerate() {
            if 2 * k > m {
                break;
            }
            c = c + *a * beta[m - 2 * k];
        }
        let term = c * eps_pow / (p + T::of_usize(m) + T::one());
        sum = sum + term;
        abs_sum = abs_sum + term.abs();
        // odd coefficients vanish when γ = 0, so demand two small terms in a row
        let small = term.abs() <= T::lit(0.25) * T::epsilon() * sum.abs();
        if m >= 4 && small && prev_small {
            let lead = Scaled::from_signed_log(gamma_sign.signum() as i8, log_lead);
            let err = lead.abs().scale(T::lit(8.0) * T::epsilon() * abs_sum);
            return Ok((lead.scale(sum), err));
        }
        prev_small = small;
    }
    Err(Error::NonConvergence {
        operation: "bessel_integral series segment",
        detail: format!("mu {mu}, ord {ord}, gamma {gamma}, eps {eps_x}"),
    })
}

/// Exact `∫₀ˣ e^{-t} t^ν I_ν(t) dt = e^{-x} x^{ν+1} (I_ν(x) + I_{ν+1}(x)) / (2ν+1)`.
pub fn antiderivative_gamma1<T: Real>(nu: T, x: T) -> Result<Scaled<T>> {
    if !(nu > T::lit(-0.5)) {
        return Err(domain(format!("antiderivative requires nu > -1/2, got nu = {nu}")));
    }
    if !(x >= T::zero()) {
        return Err(domain(format!("antiderivative requires x >= 0, got x = {x}")));
    }
    if x == T::zero() {
        return Ok(Scaled::zero());
    }
    let pref = Scaled::from_log(-x + (nu + T::one()) * x.ln()) / Scaled::from_value(T::lit(2.0) * nu + T::one());
    Ok(pref * (besseli(nu, x)? + besseli(nu + T::one(), x)?))
}

/// Two-term large-`x` expansion
/// `x^{μ-1/2} e^{(1-γ)x} / (√(2π)(1-γ)) · {1 - ((4ν²-1)/8 + (μ-1/2)/(1-γ)) / x}`.
pub fn integral_asymptote<T: Real>(mu: T, nu: T, gamma: T, x: T) -> Result<Scaled<T>> {
    if !(mu + nu > -T::one()) {
        return Err(domain(format!(
            "asymptote requires mu + nu > -1, got mu = {mu}, nu = {nu}"
        )));
    }
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(domain(format!(
            "asymptote requires 0 <= gamma < 1, got gamma = {gamma}"
        )));
    }
    if !(x > T::zero()) {
        return Err(domain(format!("asymptote requires x > 0, got x = {x}")));
    }
    let half = T::lit(0.5);
    let tilt = T::one() - gamma;
    let log_lead = (mu - half) * x.ln() + tilt * x - half * T::TAU().ln() - tilt.ln();
    let second = (T::lit(4.0) * nu * nu - T::one()) / T::lit(8.0) + (mu - half) / tilt;
    Ok(Scaled::from_log(log_lead).scale(T::one() - second / x))
}

/// Exact identities between integrals of neighbouring orders. Residuals near
/// zero validate the oracle and the kernel against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `F(ν+1, ν, γ) = e^{-γx} x^{ν+1} I_{ν+1}(x) + γ F(ν+1, ν+1, γ)`; `ν > -1`, `0 ≤ γ < 1`.
    IntegrationByParts,
    /// `F(ν, ν+1, γ) - γ F(ν, ν, γ) = e^{-γx} x^ν I_ν(x) - 2ν F(ν-1, ν, γ)`; `ν > 0`, `0 ≤ γ < 1`.
    ShiftedByParts,
    /// `F(ν, ν+n, 0) = 2(ν+n+1)/(2ν+n+1) x^ν I_{ν+n+1}(x) - (n+1)/(2ν+n+1) F(ν, ν+n+2, 0)`;
    /// `ν+n+1 > 0`, `2ν+n+1 > 0`.
    OrderReduction,
    /// `x (I_ν K_{ν+1} + I_{ν+1} K_ν) = 1`.
    Wronskian,
}

/// `|LHS - RHS| / max(|LHS|, |RHS|)` for `id`. Terms are moved across the
/// equals sign so both sides are sums of nonnegative quantities, which keeps
/// the comparison free of cancellation.
pub fn identity_residual<T: Real>(id: Identity, nu: T, n: T, gamma: T, x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("identity requires x > 0, got x = {x}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let tol = clamp_tol(T::lit(DEFAULT_TOL));
    let f =
        |mu: T, ord: T| -> Result<Scaled<T>> { Ok(bessel_integral(&IntegralSpec::new(mu, ord, gamma, x), tol)?.value) };
    let tilted_power = |p: T| Scaled::from_log(-gamma * x + p * x.ln());
    let require_tilt = || {
        if gamma >= T::zero() && gamma < one {
            Ok(())
        } else {
            Err(domain(format!("identity requires 0 <= gamma < 1, got gamma = {gamma}")))
        }
    };

    // (lhs, rhs) as lists of signed terms
    let (lhs, rhs): (Vec<Scaled<T>>, Vec<Scaled<T>>) = match id {
        Identity::IntegrationByParts => {
            require_tilt()?;
            if !(nu > -one) {
                return Err(domain(format!("integration by parts requires nu > -1, got nu = {nu}")));
            }
            (
                vec![f(nu + one, nu)?],
                vec![
                    tilted_power(nu + one) * besseli(nu + one, x)?,
                    f(nu + one, nu + one)?.scale(gamma),
                ],
            )
        }
        Identity::ShiftedByParts => {
            require_tilt()?;
            if !(nu > T::zero()) {
                return Err(domain(format!("shifted identity requires nu > 0, got nu = {nu}")));
            }
            (
                vec![f(nu, nu + one)?, -f(nu, nu)?.scale(gamma)],
                vec![tilted_power(nu) * besseli(nu, x)?, -f(nu - one, nu)?.scale(two * nu)],
            )
        }
        Identity::OrderReduction => {
            if gamma != T::zero() {
                return Err(domain(format!(
                    "order reduction requires gamma = 0, got gamma = {gamma}"
                )));
            }
            if !(nu + n + one > T::zero()) {
                return Err(domain(format!(
                    "order reduction requires nu + n + 1 > 0, got nu = {nu}, n = {n}"
                )));
            }
            let denom = two * nu + n + one;
            if !(denom > T::zero()) {
                return Err(domain(format!(
                    "order reduction requires 2nu + n + 1 > 0, got nu = {nu}, n = {n}"
                )));
            }
            (
                vec![f(nu, nu + n)?],
                vec![
                    (Scaled::from_log(nu * x.ln()) * besseli(nu + n + one, x)?).scale(two * (nu + n + one) / denom),
                    -f(nu, nu + n + two)?.scale((n + one) / denom),
                ],
            )
        }
        Identity::Wronskian => {
            let xs = Scaled::from_value(x);
            (
                vec![
                    xs * besseli(nu, x)? * besselk(nu + one, x)?,
                    xs * besseli(nu + one, x)? * besselk(nu, x)?,
                ],
                vec![Scaled::one()],
            )
        }
    };

    let mut left = Scaled::zero();
    let mut right = Scaled::zero();
    for t in lhs {
        if t.sign() >= 0 {
            left = left + t
        } else {
            right = right - t
        }
    }
    for t in rhs {
        if t.sign() >= 0 {
            right = right + t
        } else {
            left = left - t
        }
    }
    let (big, small) = if left >= right { (left, right) } else { (right, left) };
    if big.is_zero() {
        return Ok(T::zero());
    }
    Ok(-small.rel_diff(&big))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mu: f64, ord: f64, gamma: f64, x: f64) -> IntegralSpec<f64> {
        IntegralSpec::new(mu, ord, gamma, x)
    }

    #[test]
    fn integral_of_t_i0_is_x_i1() {
        let r = bessel_integral(&spec(1.0, 0.0, 0.0, 2.0), 1e-12).unwrap();
        assert!(r.converged);
        assert!((r.value.value() - 3.181_273_709_274_658).abs() < 1e-11);
    }

    #[test]
    fn empty_range_is_zero() {
        let r = bessel_integral(&spec(0.0, 0.0, 0.5, 0.0), 1e-10).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(r.segments, 0);
    }

    #[test]
    fn gamma_one_matches_antiderivative() {
        let r = bessel_integral(&spec(2.5, 2.5, 1.0, 5.0), 1e-13).unwrap();
        let exact = antiderivative_gamma1(2.5, 5.0).unwrap();
        assert!(r.value.rel_diff(&exact).abs() < 1e-10);
    }

    #[test]
    fn precondition_failures() {
        assert!(matches!(
            bessel_integral(&spec(-0.5, -0.5, 0.0, 1.0), 1e-10),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            bessel_integral(&spec(0.0, 0.0, 1.5, 1.0), 1e-10),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            bessel_integral(&spec(0.0, 0.0, 0.5, -1.0), 1e-10),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            bessel_integral(&spec(0.0, 0.0, 0.5, 1.0), 1e-3),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            bessel_integral(&spec(0.0, 0.0, 0.5, 1.0), 1e-15),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            bessel_integral(&spec(3.0, -2.0, 0.5, 1.0), 1e-10),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn near_singular_endpoint() {
        // ∫₀ˣ t^{-0.45} I_{-0.45}(t) dt; integrand ~ t^{-0.9} at 0. Reference: term-wise series in mpmath.
        let r = bessel_integral(&spec(-0.45, -0.45, 0.0, 3.0), 1e-12).unwrap();
        assert!(
            (r.value.log_abs() - 2.493_839_083_297_854_7).abs() < 1e-11,
            "{}",
            r.value.log_abs()
        );
    }

    #[test]
    fn antiderivative_examples() {
        let v = antiderivative_gamma1(0.0f64, 1.0).unwrap().value();
        assert!((v - 0.673_670_022_943_348_9).abs() < 1e-14);
        assert!(matches!(antiderivative_gamma1(-0.5, 1.0), Err(Error::InvalidDomain(_))));
        assert!(antiderivative_gamma1(0.3, 0.0).unwrap().is_zero());
    }

    #[test]
    fn asymptote_examples() {
        let oracle = bessel_integral(&spec(0.0, 0.0, 0.0, 100.0), 1e-12).unwrap();
        let approx = integral_asymptote(0.0, 0.0, 0.0, 100.0).unwrap();
        assert!(approx.rel_diff(&oracle.value).abs() < 1e-3);
        assert!(matches!(
            integral_asymptote(0.0, 0.0, 1.0, 1.0),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn identity_examples() {
        assert!(identity_residual(Identity::IntegrationByParts, 0.5, 0.0, 0.3, 4.0).unwrap() < 1e-10);
        assert!(identity_residual(Identity::OrderReduction, 1.0, 0.0, 0.0, 3.0).unwrap() < 1e-10);
        assert!(identity_residual(Identity::Wronskian, 0.7, 0.0, 0.0, 2.0).unwrap() < 1e-10);
        assert!(identity_residual(Identity::ShiftedByParts, 1.5, 0.0, 0.6, 7.0).unwrap() < 1e-10);
        assert!(matches!(
            identity_residual(Identity::ShiftedByParts, 0.0, 0.0, 0.5, 1.0),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            identity_residual(Identity::OrderReduction, 1.0, 0.0, 0.2, 1.0),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn single_precision_oracle() {
        let r = bessel_integral(&IntegralSpec::new(1.0f32, 0.0, 0.0, 2.0), 2e-6).unwrap();
        assert!((r.value.value() - 3.181_273_7).abs() < 2e-5);
    }
}
