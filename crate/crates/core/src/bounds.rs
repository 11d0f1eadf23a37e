//! Closed-form bounds on `∫₀ˣ e^{-γt} t^μ I_{ν+n}(t) dt` and related
//! constants.
//!
//! Every bound is written as a combination of `I` values times the common
//! factor `e^{-γx} x^ν` (or `x^{ν+1}`, `x^μ`), evaluated in [`Scaled`]
//! arithmetic so the `e^{(1-γ)x}` growth never overflows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bessel::{besseli, besseli_ladder, besselk};
use crate::error::{domain, Error, Result};
use crate::oracle::{bessel_integral, clamp_tol, IntegralSpec, DEFAULT_TOL};
use crate::real::Real;
use crate::scaled::Scaled;

/// Default relative truncation tolerance for the series bounds.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

const LADDER_CHUNK: usize = 64;
const MAX_SERIES_TERMS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Main,
    Simple,
    Gau1,
    Baaad,
    New1,
    Lower4,
    TwosidedL,
    TwosidedU,
    Lower1,
    Lower3,
    Intineq0,
    Lower2,
    Prop1,
    Need2,
    Day,
}

/// Which side of the integral a bound sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
    /// The formula equals the integral.
    Equality,
    /// Nominally an upper bound whose inequality flips on this part of the
    /// domain; checked as a lower bound.
    Reversed,
}

impl Direction {
    /// `+1` when the bound should exceed the integral, `-1` when it should
    /// fall below it, `0` for an identity.
    pub fn sense(self) -> i8 {
        match self {
            Direction::Upper => 1,
            Direction::Lower | Direction::Reversed => -1,
            Direction::Equality => 0,
        }
    }
}

/// Parameters at which a bound is evaluated. Bounds read only the fields
/// they use: `n` for the shifted-order bounds, `mu` for [`BoundId::Prop1`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub nu: T,
    pub n: T,
    pub mu: T,
    pub gamma: T,
    pub x: T,
}

impl<T: Real> Point<T> {
    pub fn new(nu: T, n: T, mu: T, gamma: T, x: T) -> Self {
        Self { nu, n, mu, gamma, x }
    }

    /// A point for bounds that use only `ν`, `γ` and `x`.
    pub fn simple(nu: T, gamma: T, x: T) -> Self {
        Self::new(nu, T::zero(), T::zero(), gamma, x)
    }

    pub fn with_x(&self, x: T) -> Self {
        Self { x, ..*self }
    }

    /// Lexicographic order on `(ν, n, μ, γ, x)` using the IEEE total order.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |p: &Self| [p.nu, p.n, p.mu, p.gamma, p.x].map(|v| v.to_f64().unwrap_or(f64::NAN));
        let (a, b) = (key(self), key(other));
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// A bound evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEval<T> {
    pub bound: BoundId,
    pub point: Point<T>,
    pub value: Scaled<T>,
    /// Series terms summed; zero for closed forms without a series.
    pub truncation_terms: usize,
    /// Upper bound on the omitted series tail; zero without a series.
    pub tail_bound: Scaled<T>,
    /// Estimated relative error of `value` from kernel accuracy and
    /// cancellation between terms.
    pub rel_uncertainty: T,
}

impl BoundId {
    pub const ALL: [BoundId; 15] = [
        BoundId::Main,
        BoundId::Simple,
        BoundId::Gau1,
        BoundId::Baaad,
        BoundId::New1,
        BoundId::Lower4,
        BoundId::TwosidedL,
        BoundId::TwosidedU,
        BoundId::Lower1,
        BoundId::Lower3,
        BoundId::Intineq0,
        BoundId::Lower2,
        BoundId::Prop1,
        BoundId::Need2,
        BoundId::Day,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::Main => "main",
            BoundId::Simple => "simple",
            BoundId::Gau1 => "gau1",
            BoundId::Baaad => "baaad",
            BoundId::New1 => "new1",
            BoundId::Lower4 => "lower4",
            BoundId::TwosidedL => "twosided_l",
            BoundId::TwosidedU => "twosided_u",
            BoundId::Lower1 => "lower1",
            BoundId::Lower3 => "lower3",
            BoundId::Intineq0 => "intineq0",
            BoundId::Lower2 => "lower2",
            BoundId::Prop1 => "prop1",
            BoundId::Need2 => "need2",
            BoundId::Day => "day",
        }
    }

    /// Direction over the bulk of the validity domain. [`BoundId::New1`]
    /// changes direction on parts of its domain; see [`BoundId::validate`].
    pub fn direction(self) -> Direction {
        match self {
            BoundId::Main
            | BoundId::Simple
            | BoundId::Gau1
            | BoundId::Baaad
            | BoundId::New1
            | BoundId::TwosidedU
            | BoundId::Prop1
            | BoundId::Need2 => Direction::Upper,
            BoundId::Lower4
            | BoundId::TwosidedL
            | BoundId::Lower1
            | BoundId::Lower3
            | BoundId::Intineq0
            | BoundId::Lower2
            | BoundId::Day => Direction::Lower,
        }
    }

    /// The inequality in formula form.
    pub fn statement(self) -> &'static str {
        match self {
            BoundId::Main => "∫₀ˣ e^{-γt} t^ν I_ν dt < (2(ν+1)+c_ν)/((2ν+1)(1-γ)) · e^{-γx} x^ν I_{ν+1}(x), c_ν = max{0, -4ν(ν+1)}",
            BoundId::Simple => "∫₀ˣ e^{-γt} t^ν I_ν dt < (2ν+3)/((2ν+1)(1-γ)) · e^{-γx} x^ν I_{ν+1}(x)",
            BoundId::Gau1 => "∫₀ˣ e^{-γt} t^ν I_ν dt < 2(ν+1)/((2ν+1)(1-γ)) · e^{-γx} x^ν I_{ν+1}(x)",
            BoundId::Baaad => "∫₀ˣ e^{-γt} t^ν I_ν dt < e^{-γx} x^ν / ((2ν+1)(1-γ)) · (2(ν+1) I_{ν+1}(x) - I_{ν+3}(x))",
            BoundId::New1 => "∫₀ˣ e^{-γt} t^ν I_{ν+n} dt < e^{-γx} x^ν / ((2ν+n+1)(1-γ)) · (2(ν+n+1) I_{ν+n+1}(x) - (n+1) I_{ν+n+3}(x))",
            BoundId::Lower4 => "∫₀ˣ e^{-γt} t^ν I_{ν+n} dt > e^{-γx} x^ν / (2ν+n+1) · (2(ν+n+1) I_{ν+n+1} - 2(n+1)(ν+n+3)/(2ν+n+3) I_{ν+n+3} + (n+1)(n+3)/(2ν+n+3) I_{ν+n+5})",
            BoundId::TwosidedL => "∫₀ˣ t^ν I_{ν+n} dt > L_{ν,n}(x) = x^ν / (2ν+n+1) · (2(ν+n+1) I_{ν+n+1} - 2(n+1)(ν+n+3)/(2ν+n+3) I_{ν+n+3} + (n+1)(n+3)/(2ν+n+3) I_{ν+n+5})",
            BoundId::TwosidedU => "∫₀ˣ t^ν I_{ν+n} dt < U_{ν,n}(x) = x^ν / (2ν+n+1) · (2(ν+n+1) I_{ν+n+1}(x) - (n+1) I_{ν+n+3}(x))",
            BoundId::Lower1 => "∫₀ˣ e^{-γt} t^{ν+1} I_ν dt > e^{-γx} x^{ν+1} Σ_{k≥0} γ^k I_{ν+k+1}(x)",
            BoundId::Lower3 => "∫₀ˣ e^{-γt} t^ν I_ν dt > e^{-γx} x^ν Σ_{k≥0} γ^k I_{ν+k+1}(x)",
            BoundId::Intineq0 => "∫₀ˣ e^{-γt} t^ν I_{ν+1} dt > 1/(1-γ) · {1 - 2ν(2ν+c_{ν-1})/((2ν-1)(1-γ)x)} · e^{-γx} x^ν I_ν(x)",
            BoundId::Lower2 => "∫₀ˣ e^{-γt} t^ν I_ν dt > 1/(1-γ) · {1 - 2ν(2ν+c_{ν-1})/((2ν-1)(1-γ)x)} · e^{-γx} x^ν I_ν(x)",
            BoundId::Prop1 => "∫₀ˣ e^{-γt} t^μ I_ν dt < 1/(1-γ) · e^{-γx} x^μ I_ν(x)",
            BoundId::Need2 => "∫₀ˣ e^{-γt} t^ν I_ν dt < e^{-γx} x^{ν+1} / (2ν+1) · ((2(ν+1)/x + γ) I_{ν+1}(x) + γ² I_{ν+2}(x))",
            BoundId::Day => "∫₀ˣ e^{-γt} t^ν I_{ν+n+2} dt > e^{-γx} x^ν I_{ν+n+3}(x)",
        }
    }

    /// Hypotheses of the bound, in words.
    pub fn hypotheses(self) -> &'static str {
        match self {
            BoundId::Main | BoundId::Simple | BoundId::Need2 => "nu > -1/2, 0 <= gamma < 1",
            BoundId::Gau1 | BoundId::Baaad => "0 <= gamma < 1 and nu >= 1/2, or gamma = 0 and nu > -1/2",
            BoundId::New1 => "0 <= gamma < 1, nu > -(n+1)/2, n > -1, nu >= 1/2 (nu >= 1/2 dropped when gamma = 0); equality at gamma = 0, n = -1, nu > 0; reversed at gamma = 0, -3 < n < -1, nu > -(n+1)",
            BoundId::Lower4 => "0 <= gamma < 1, n > -1, nu > -(n+1)/2",
            BoundId::TwosidedL | BoundId::TwosidedU => "gamma = 0, n > -1, nu > -(n+1)/2",
            BoundId::Lower1 => "nu > -1, 0 <= gamma < 1",
            BoundId::Lower3 => "nu > -1/2, 0 <= gamma < 1",
            BoundId::Intineq0 | BoundId::Lower2 => "nu > 1/2, 0 <= gamma < 1",
            BoundId::Prop1 => "mu >= nu >= 1/2, 0 <= gamma < 1",
            BoundId::Day => "0 <= gamma < 1, n > -3, nu > -(n+3)/2",
        }
    }

    pub fn uses_n(self) -> bool {
        matches!(
            self,
            BoundId::New1 | BoundId::Lower4 | BoundId::TwosidedL | BoundId::TwosidedU | BoundId::Day
        )
    }

    pub fn uses_mu(self) -> bool {
        self == BoundId::Prop1
    }

    /// Whether the value is an infinite series truncated at evaluation.
    pub fn is_series(self) -> bool {
        matches!(self, BoundId::Lower1 | BoundId::Lower3)
    }

    /// The integral the bound applies to.
    pub fn target<T: Real>(self, p: &Point<T>) -> IntegralSpec<T> {
        let one = T::one();
        let (mu, ord) = match self {
            BoundId::Main
            | BoundId::Simple
            | BoundId::Gau1
            | BoundId::Baaad
            | BoundId::Lower3
            | BoundId::Lower2
            | BoundId::Need2 => (p.nu, p.nu),
            BoundId::New1 | BoundId::Lower4 | BoundId::TwosidedL | BoundId::TwosidedU => (p.nu, p.nu + p.n),
            BoundId::Lower1 => (p.nu + one, p.nu),
            BoundId::Intineq0 => (p.nu, p.nu + one),
            BoundId::Prop1 => (p.mu, p.nu),
            BoundId::Day => (p.nu, p.nu + p.n + T::lit(2.0)),
        };
        let gamma = if matches!(self, BoundId::TwosidedL | BoundId::TwosidedU) {
            T::zero()
        } else {
            p.gamma
        };
        IntegralSpec::new(mu, ord, gamma, p.x)
    }

    /// Checks the stated hypotheses at `p` and returns the direction that
    /// holds there. The error message names the failed hypothesis.
    pub fn validate<T: Real>(self, p: &Point<T>) -> Result<Direction> {
        check_common(self, p)?;
        let Point { nu, n, mu, gamma, .. } = *p;
        let zero = T::zero();
        let one = T::one();
        let half = T::lit(0.5);
        let fail = |h: &str| {
            Err(domain(format!(
                "{}: hypothesis {h} not met at {}",
                self.name(),
                fmt_point(p)
            )))
        };
        match self {
            BoundId::Main | BoundId::Simple | BoundId::Need2 | BoundId::Lower3 => {
                if !(nu > -half) {
                    return fail("nu > -1/2");
                }
            }
            BoundId::Gau1 | BoundId::Baaad => {
                if gamma == zero {
                    if !(nu > -half) {
                        return fail("nu > -1/2 (gamma = 0)");
                    }
                } else if !(nu >= half) {
                    return fail("nu >= 1/2 (gamma > 0)");
                }
            }
            BoundId::New1 => {
                if !(nu > -(n + one) * half) {
                    return fail("nu > -(n+1)/2");
                }
                if n > -one {
                    if gamma != zero && !(nu >= half) {
                        return fail("nu >= 1/2 (gamma > 0)");
                    }
                } else if gamma != zero {
                    return fail("n > -1 (gamma > 0)");
                } else if n == -one {
                    if !(nu > zero) {
                        return fail("nu > 0 (n = -1)");
                    }
                    return Ok(Direction::Equality);
                } else if n > -T::lit(3.0) {
                    if !(nu > -(n + one)) {
                        return fail("nu > -(n+1) (-3 < n < -1)");
                    }
                    return Ok(Direction::Reversed);
                } else {
                    return fail("n > -3");
                }
            }
            BoundId::Lower4 | BoundId::TwosidedL | BoundId::TwosidedU => {
                if matches!(self, BoundId::TwosidedL | BoundId::TwosidedU) && gamma != zero {
                    return fail("gamma = 0");
                }
                if !(n > -one) {
                    return fail("n > -1");
                }
                if !(nu > -(n + one) * half) {
                    return fail("nu > -(n+1)/2");
                }
            }
            BoundId::Lower1 => {
                if !(nu > -one) {
                    return fail("nu > -1");
                }
            }
            BoundId::Intineq0 | BoundId::Lower2 => {
                if !(nu > half) {
                    return fail("nu > 1/2");
                }
            }
            BoundId::Prop1 => {
                if !(mu + nu > -one) {
                    return fail("mu + nu > -1");
                }
                if !(mu >= nu && nu >= half) {
                    return fail("mu >= nu >= 1/2");
                }
            }
            BoundId::Day => {
                if !(n > -T::lit(3.0)) {
                    return fail("n > -3");
                }
                if !(nu > -(n + T::lit(3.0)) * half) {
                    return fail("nu > -(n+3)/2");
                }
            }
        }
        Ok(self.direction())
    }

    /// Looser check for exploratory runs outside the stated hypotheses: only
    /// requires the target integral to exist and the formula to be finite.
    pub fn validate_exploratory<T: Real>(self, p: &Point<T>) -> Result<Direction> {
        if let Ok(d) = self.validate(p) {
            return Ok(d);
        }
        check_common(self, p)?;
        self.target(p).validate()?;
        Ok(self.direction())
    }
}

fn check_common<T: Real>(id: BoundId, p: &Point<T>) -> Result<()> {
    let finite = [p.nu, p.n, p.mu, p.gamma, p.x].iter().all(|v| v.is_finite());
    if !finite {
        return Err(domain(format!("{}: parameters must be finite", id.name())));
    }
    if !(p.x > T::zero()) {
        return Err(domain(format!(
            "{}: hypothesis x > 0 not met at {}",
            id.name(),
            fmt_point(p)
        )));
    }
    if !(p.gamma >= T::zero() && p.gamma < T::one()) {
        return Err(domain(format!(
            "{}: hypothesis 0 <= gamma < 1 not met at {}",
            id.name(),
            fmt_point(p)
        )));
    }
    Ok(())
}

fn fmt_point<T: Real>(p: &Point<T>) -> String {
    format!(
        "(nu = {}, n = {}, mu = {}, gamma = {}, x = {})",
        p.nu, p.n, p.mu, p.gamma, p.x
    )
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        BoundId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| domain(format!("unknown bound '{s}'")))
    }
}

/// `c_ν = max{0, -4ν(ν+1)}`.
pub fn c_nu<T: Real>(nu: T) -> Result<T> {
    if !(nu > T::lit(-0.5)) {
        return Err(domain(format!("c_nu requires nu > -1/2, got nu = {nu}")));
    }
    Ok((-T::lit(4.0) * nu * (nu + T::one())).max(T::zero()))
}

/// Threshold `½(2ν+1)² + (1-2ν)(ν+1)/(1-γ)` beyond which the ratio argument
/// for the main bound applies directly. Can be negative.
pub fn x_star<T: Real>(nu: T, gamma: T) -> Result<T> {
    if !(nu > T::lit(-0.5)) {
        return Err(domain(format!("x_star requires nu > -1/2, got nu = {nu}")));
    }
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(domain(format!("x_star requires 0 <= gamma < 1, got gamma = {gamma}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let s = two * nu + one;
    Ok(T::lit(0.5) * s * s + (one - two * nu) * (nu + one) / (one - gamma))
}

/// Relative error assumed for one kernel value with log-magnitude `log_abs`.
fn kernel_rel_err<T: Real>(log_abs: T) -> T {
    T::epsilon() * (T::lit(64.0) + T::lit(4.0) * log_abs.abs())
}

/// `Σ cᵢ vᵢ` together with the relative uncertainty of the sum implied by
/// kernel errors in each `vᵢ`, amplified by cancellation.
fn combine<T: Real>(terms: &[(T, Scaled<T>)]) -> (Scaled<T>, T) {
    let mut sum = Scaled::zero();
    let mut spread = Scaled::zero();
    for &(c, v) in terms {
        let t = v.scale(c);
        sum = sum + t;
        spread = spread + t.abs().scale(kernel_rel_err(v.log_abs()));
    }
    let rel = if sum.is_zero() {
        if spread.is_zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        spread.ratio(&sum.abs())
    };
    (sum, rel)
}

/// `Σ_{k=0}^{K} γ^k I_{ν+k+1}(x)` with `K` the first index where the tail
/// bound `γ^{K+1} I_{ν+K+2}(x) / (1-γ)` drops below `series_tol` times the
/// partial sum. The bound on the tail uses `I_{ν+k+1} ≤ I_{ν+K+2}` for
/// `k > K`. Returns `(sum, terms, tail)`.
fn gamma_series<T: Real>(nu: T, gamma: T, x: T, series_tol: T) -> Result<(Scaled<T>, usize, Scaled<T>)> {
    let first = besseli(nu + T::one(), x)?;
    if gamma == T::zero() {
        return Ok((first, 1, Scaled::zero()));
    }
    let log_gamma = gamma.ln();
    let log_tail_factor = -(T::one() - gamma).ln();
    let mut sum = Scaled::zero();
    let mut k = 0usize;
    loop {
        let ladder = besseli_ladder(nu + T::one() + T::of_usize(k), x, LADDER_CHUNK + 1)?;
        for j in 0..LADDER_CHUNK {
            let kk = T::of_usize(k);
            sum = sum + ladder[j] * Scaled::from_log(kk * log_gamma);
            let tail = ladder[j + 1] * Scaled::from_log((kk + T::one()) * log_gamma + log_tail_factor);
            k += 1;
            if tail <= sum.scale(series_tol) {
                return Ok((sum, k, tail));
            }
        }
        if k >= MAX_SERIES_TERMS {
            return Err(Error::NonConvergence {
                operation: "gamma series bound",
                detail: format!("nu {nu}, gamma {gamma}, x {x}: {k} terms"),
            });
        }
    }
}

/// Evaluates `id` at `p`. Requires `p` to satisfy the bound's hypotheses.
pub fn bound_value<T: Real>(id: BoundId, p: &Point<T>, series_tol: T) -> Result<BoundEval<T>> {
    id.validate(p)?;
    evaluate(id, p, series_tol)
}

/// Evaluates the formula of `id` at `p` after only the exploratory checks.
pub fn bound_value_exploratory<T: Real>(id: BoundId, p: &Point<T>, series_tol: T) -> Result<BoundEval<T>> {
    id.validate_exploratory(p)?;
    evaluate(id, p, series_tol)
}

fn evaluate<T: Real>(id: BoundId, p: &Point<T>, series_tol: T) -> Result<BoundEval<T>> {
    if !(series_tol > T::zero() && series_tol < T::one()) {
        return Err(domain(format!("series tolerance must lie in (0, 1), got {series_tol}")));
    }
    let Point { nu, n, mu, gamma, x } = *p;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let lx = x.ln();
    let tilt = one - gamma;
    let i = |order: T| besseli(order, x);
    let pref = |power: T| Scaled::from_log(-gamma * x + power * lx);

    let mut terms_used = 0usize;
    let mut tail = Scaled::zero();
    let (value, rel) = match id {
        BoundId::Main | BoundId::Simple | BoundId::Gau1 => {
            let numer = match id {
                BoundId::Main => two * (nu + one) + c_nu(nu)?,
                BoundId::Simple => two * nu + three,
                _ => two * (nu + one),
            };
            let c = numer / ((two * nu + one) * tilt);
            let v = pref(nu) * i(nu + one)?;
            (v.scale(c), kernel_rel_err(v.log_abs()))
        }
        BoundId::Baaad => {
            let (s, rel) = combine(&[(two * (nu + one), i(nu + one)?), (-one, i(nu + three)?)]);
            (pref(nu) * s.scale(one / ((two * nu + one) * tilt)), rel)
        }
        BoundId::New1 | BoundId::TwosidedU => {
            let g = if id == BoundId::TwosidedU { one } else { tilt };
            let m = nu + n;
            let (s, rel) = combine(&[(two * (m + one), i(m + one)?), (-(n + one), i(m + three)?)]);
            (pref(nu) * s.scale(one / ((two * nu + n + one) * g)), rel)
        }
        BoundId::Lower4 | BoundId::TwosidedL => {
            let m = nu + n;
            let d = two * nu + n + three;
            let (s, rel) = combine(&[
                (two * (m + one), i(m + one)?),
                (-two * (n + one) * (m + three) / d, i(m + three)?),
                ((n + one) * (n + three) / d, i(m + T::lit(5.0))?),
            ]);
            (pref(nu) * s.scale(one / (two * nu + n + one)), rel)
        }
        BoundId::Lower1 | BoundId::Lower3 => {
            let power = if id == BoundId::Lower1 { nu + one } else { nu };
            let (s, k, t) = gamma_series(nu, gamma, x, series_tol)?;
            terms_used = k;
            let scale = pref(power);
            tail = scale * t;
            let v = scale * s;
            (v, kernel_rel_err(v.log_abs()))
        }
        BoundId::Intineq0 | BoundId::Lower2 => {
            let c = c_nu(nu - one)?;
            let corr = two * nu * (two * nu + c) / ((two * nu - one) * tilt * x);
            let v = pref(nu) * i(nu)?;
            let factor = (one - corr) / tilt;
            // cancellation inside the braces amplifies the kernel error
            let amp = if factor == T::zero() {
                T::infinity()
            } else {
                (one + corr.abs()) / (one - corr).abs()
            };
            (v.scale(factor), kernel_rel_err(v.log_abs()) * amp)
        }
        BoundId::Prop1 => {
            let v = pref(mu) * i(nu)?;
            (v.scale(one / tilt), kernel_rel_err(v.log_abs()))
        }
        BoundId::Need2 => {
            let (s, rel) = combine(&[
                (two * (nu + one) / x + gamma, i(nu + one)?),
                (gamma * gamma, i(nu + two)?),
            ]);
            (pref(nu + one) * s.scale(one / (two * nu + one)), rel)
        }
        BoundId::Day => {
            let v = pref(nu) * i(nu + n + three)?;
            (v, kernel_rel_err(v.log_abs()))
        }
    };
    Ok(BoundEval {
        bound: id,
        point: *p,
        value,
        truncation_terms: terms_used,
        tail_bound: tail,
        rel_uncertainty: rel + kernel_rel_err(value.log_abs()),
    })
}

fn check_m_args<T: Real>(nu: T, beta: T, n: u32) -> Result<()> {
    if !(nu > T::lit(-0.5)) {
        return Err(domain(format!("requires nu > -1/2, got nu = {nu}")));
    }
    if !(beta > -T::one() && beta <= T::zero()) {
        return Err(domain(format!("requires -1 < beta <= 0, got beta = {beta}")));
    }
    if n > 2 {
        return Err(domain(format!("requires n in {{0, 1, 2}}, got n = {n}")));
    }
    Ok(())
}

/// `M_{ν,β,n}(x) = e^{-βx} K_{ν+n}(x) x^{1-ν} ∫₀ˣ e^{βt} t^ν I_ν(t) dt`.
pub fn m_value<T: Real>(nu: T, beta: T, n: u32, x: T) -> Result<Scaled<T>> {
    check_m_args(nu, beta, n)?;
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(domain(format!("requires x >= 0, got x = {x}")));
    }
    if x == T::zero() {
        return Ok(Scaled::zero());
    }
    let gamma = -beta;
    let f = bessel_integral(&IntegralSpec::new(nu, nu, gamma, x), clamp_tol(T::lit(DEFAULT_TOL)))?;
    let k = besselk(nu + T::of_usize(n as usize), x)?;
    Ok(Scaled::from_log(-beta * x + (T::one() - nu) * x.ln()) * k * f.value)
}

/// Uniform upper bound on `M_{ν,β,n}`: `(2(ν+1)+c_ν)/((2ν+1)(1+β))` for
/// `n = 2`, `(ν+1+c_ν/2)/((2ν+1)(1+β))` for `n ∈ {0, 1}`.
pub fn m_bound_constant<T: Real>(nu: T, beta: T, n: u32) -> Result<T> {
    check_m_args(nu, beta, n)?;
    let one = T::one();
    let two = T::lit(2.0);
    let c = c_nu(nu)?;
    let numer = if n == 2 {
        two * (nu + one) + c
    } else {
        nu + one + c / two
    };
    Ok(numer / ((two * nu + one) * (one + beta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(nu: f64, n: f64, gamma: f64, x: f64) -> Point<f64> {
        Point::new(nu, n, 0.0, gamma, x)
    }

    #[test]
    fn c_nu_examples() {
        assert_eq!(c_nu::<f64>(0.0).unwrap(), 0.0);
        assert!((c_nu::<f64>(-0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!(c_nu::<f64>(-0.4999).unwrap() < 1.0);
        assert!(c_nu::<f64>(-0.5).is_err());
    }

    #[test]
    fn x_star_examples() {
        assert!((x_star::<f64>(0.5, 0.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((x_star::<f64>(0.0, 0.0).unwrap() - 1.5).abs() < 1e-14);
        assert!((x_star::<f64>(2.0, 0.9).unwrap() + 77.5).abs() < 1e-11);
    }

    #[test]
    fn main_bound_example() {
        let b = bound_value(BoundId::Main, &Point::simple(0.0, 0.0, 2.0), DEFAULT_SERIES_TOL).unwrap();
        assert!((b.value.value() - 3.181_273_709_274_658).abs() < 1e-12);
    }

    #[test]
    fn new1_equality_case() {
        let p = pt(1.0, -1.0, 0.0, 3.0);
        assert_eq!(BoundId::New1.validate(&p).unwrap(), Direction::Equality);
        let b = bound_value(BoundId::New1, &p, DEFAULT_SERIES_TOL).unwrap();
        let f = bessel_integral(&BoundId::New1.target(&p), 1e-13).unwrap();
        assert!(b.value.rel_diff(&f.value).abs() < 1e-12);
    }

    #[test]
    fn new1_directions() {
        assert_eq!(
            BoundId::New1.validate(&pt(1.0, 0.0, 0.3, 1.0)).unwrap(),
            Direction::Upper
        );
        assert_eq!(
            BoundId::New1.validate(&pt(0.0, 0.0, 0.0, 1.0)).unwrap(),
            Direction::Upper
        );
        assert!(BoundId::New1.validate(&pt(0.0, 0.0, 0.3, 1.0)).is_err());
        assert_eq!(
            BoundId::New1.validate(&pt(1.5, -2.0, 0.0, 1.0)).unwrap(),
            Direction::Reversed
        );
        assert!(BoundId::New1.validate(&pt(0.8, -2.0, 0.0, 1.0)).is_err());
        assert!(BoundId::New1.validate(&pt(1.0, -1.5, 0.2, 1.0)).is_err());
    }

    #[test]
    fn hypothesis_named_in_error() {
        let err = BoundId::Intineq0.validate(&pt(0.5, 0.0, 0.1, 1.0)).unwrap_err();
        assert!(err.to_string().contains("nu > 1/2"), "{err}");
        assert!(BoundId::Main.validate(&pt(0.0, 0.0, 1.0, 1.0)).is_err());
        assert!(BoundId::Main.validate(&pt(-0.5, 0.0, 0.0, 1.0)).is_err());
        assert!(BoundId::Gau1.validate(&pt(0.5, 0.0, 0.5, 1.0)).is_ok());
    }

    #[test]
    fn parse_names() {
        for id in BoundId::ALL {
            assert_eq!(id.name().parse::<BoundId>().unwrap(), id);
        }
        assert_eq!("TWOSIDED-L".parse::<BoundId>().unwrap(), BoundId::TwosidedL);
        assert!("nope".parse::<BoundId>().is_err());
    }

    #[test]
    fn series_bound_truncation() {
        let p = pt(0.5, 0.0, 0.9, 30.0);
        let b = bound_value(BoundId::Lower3, &p, 1e-12).unwrap();
        assert!(b.truncation_terms > 10);
        assert!(b.tail_bound.ratio(&b.value) <= 1e-12);
        let coarse = bound_value(BoundId::Lower3, &p, 1e-3).unwrap();
        assert!(coarse.truncation_terms < b.truncation_terms);
        assert!(coarse.value < b.value);
        let g0 = bound_value(BoundId::Lower1, &pt(0.5, 0.0, 0.0, 3.0), 1e-12).unwrap();
        assert_eq!(g0.truncation_terms, 1);
        assert!(g0.tail_bound.is_zero());
    }

    #[test]
    fn m_constants() {
        assert!((m_bound_constant::<f64>(0.0, 0.0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((m_bound_constant::<f64>(0.0, 0.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((m_bound_constant::<f64>(-0.25, -0.5, 2).unwrap() - 9.0).abs() < 1e-13);
        assert!(m_bound_constant::<f64>(0.0, -1.0, 0).is_err());
        assert!(m_bound_constant::<f64>(0.0, 0.0, 3).is_err());
    }

    #[test]
    fn m_values() {
        assert!(m_value::<f64>(1.0, 0.0, 2, 1.0).unwrap().value() < 4.0 / 3.0);
        assert!(m_value::<f64>(0.5, -0.5, 1, 10.0).unwrap().value() < 1.5);
        assert!(m_value::<f64>(0.3, -0.2, 0, 0.0).unwrap().is_zero());
        let tiny = m_value::<f64>(0.3, -0.2, 0, 1e-4).unwrap().value();
        assert!(tiny < 1e-7, "{tiny}");
    }
}
