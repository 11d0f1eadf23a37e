//! Numerical certification of the bound catalog against the quadrature
//! oracle.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::besseli;
use crate::bounds::{bound_value, bound_value_exploratory, BoundId, Direction, Point, DEFAULT_SERIES_TOL};
use crate::error::{domain, Error, Result};
use crate::oracle::{bessel_integral, check_tol, clamp_tol, IntegralSpec, QuadResult};
use crate::scaled::Scaled;

type S = Scaled<f64>;

/// Uncertainty estimates are multiplied by this before a verdict is drawn.
pub const SAFETY_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub bound: BoundId,
    pub point: Point<f64>,
    /// Direction checked at this point.
    pub direction: Direction,
    pub bound_value: S,
    pub oracle_value: S,
    pub oracle_err: S,
    pub verdict: Verdict,
    /// `(bound - oracle) / oracle` for upper bounds, `(oracle - bound) / oracle`
    /// for lower and reversed ones, `-|bound - oracle| / oracle` for
    /// identities. Positive means the claim holds.
    pub rel_margin: f64,
    /// Combined relative uncertainty of the comparison.
    pub uncertainty: f64,
    /// Set when the point was checked outside the stated hypotheses or a
    /// numerical step failed.
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub series_tol: f64,
    /// Check points outside the stated hypotheses, as long as the integral
    /// exists and the formula can be evaluated.
    pub exploratory: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            series_tol: DEFAULT_SERIES_TOL,
            exploratory: false,
        }
    }
}

/// Relative accuracy lost to the log-space representation of an oracle
/// value whose integrand reaches log-magnitude around `log_scale`.
fn representation_floor(log_scale: f64) -> f64 {
    f64::EPSILON * (64.0 + 4.0 * log_scale.abs())
}

fn oracle_tol(tol: f64) -> f64 {
    clamp_tol(tol / 10.0)
}

/// Checks one bound at one point.
pub fn check_point(id: BoundId, point: &Point<f64>, tol: f64) -> Result<CheckReport> {
    check_point_with(
        id,
        point,
        &CheckOptions {
            tol,
            ..CheckOptions::default()
        },
    )
}

pub fn check_point_with(id: BoundId, point: &Point<f64>, opts: &CheckOptions) -> Result<CheckReport> {
    check_tol(opts.tol)?;
    let direction = admit(id, point, opts.exploratory)?;
    let oracle = bessel_integral(&id.target(point), oracle_tol(opts.tol))?;
    judge(id, point, direction, &oracle, opts)
}

fn admit(id: BoundId, point: &Point<f64>, exploratory: bool) -> Result<Direction> {
    if exploratory {
        id.validate_exploratory(point)
    } else {
        id.validate(point)
    }
}

fn judge(
    id: BoundId,
    point: &Point<f64>,
    direction: Direction,
    oracle: &QuadResult<f64>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let eval = if opts.exploratory {
        bound_value_exploratory(id, point, opts.series_tol)?
    } else {
        bound_value(id, point, opts.series_tol)?
    };
    let f = oracle.value;
    if f.is_zero() {
        return Err(Error::NonConvergence {
            operation: "check_point",
            detail: "oracle returned zero".into(),
        });
    }
    let gap = eval.value.rel_diff(&f);
    let rel_margin = match direction.sense() {
        1 => gap,
        -1 => -gap,
        _ => -gap.abs(),
    };
    let log_scale = f.log_abs().abs().max(point.x);
    let raw =
        oracle.rel_err() + representation_floor(log_scale) + eval.rel_uncertainty + eval.tail_bound.ratio(&f.abs());
    let uncertainty = if raw.is_finite() { SAFETY_FACTOR * raw } else { f64::MAX };
    let verdict = if rel_margin.abs() <= uncertainty {
        Verdict::Inconclusive
    } else if rel_margin < 0.0 {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    let note =
        (opts.exploratory && id.validate(point).is_err()).then(|| "exploratory: outside stated hypotheses".to_string());
    Ok(CheckReport {
        bound: id,
        point: *point,
        direction,
        bound_value: eval.value,
        oracle_value: f,
        oracle_err: oracle.abs_err,
        verdict,
        rel_margin,
        uncertainty,
        note,
    })
}

/// Axes of a sweep. Bounds that ignore `n` or `μ` are evaluated once with
/// that coordinate set to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nu: Vec<f64>,
    pub n: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub x: Vec<f64>,
}

/// `count` points from `lo` to `hi` equally spaced in `log x`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

impl Grid {
    /// Nine orders, seven tilts, 24 log-spaced `x` in `[1e-3, 200]`, four
    /// shifts and five powers.
    pub fn standard() -> Self {
        Self {
            nu: vec![-0.49, -0.25, 0.0, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0],
            n: vec![-0.5, 0.0, 1.0, 2.0],
            mu: vec![0.0, 0.4, 0.5, 1.0, 2.0],
            gamma: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99],
            x: logspace(1e-3, 200.0, 24),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty() || self.gamma.is_empty() || self.x.is_empty()
    }

    /// Points relevant to `id` in canonical order.
    pub fn points_for(&self, id: BoundId) -> Vec<Point<f64>> {
        let zero = [0.0];
        let ns: &[f64] = if id.uses_n() && !self.n.is_empty() {
            &self.n
        } else {
            &zero
        };
        let mus: &[f64] = if id.uses_mu() && !self.mu.is_empty() {
            &self.mu
        } else {
            &zero
        };
        let mut out = Vec::new();
        for &nu in &self.nu {
            for &n in ns {
                for &mu in mus {
                    for &gamma in &self.gamma {
                        for &x in &self.x {
                            out.push(Point::new(nu, n, mu, gamma, x));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out.dedup_by(|a, b| a.total_cmp(b).is_eq());
        out
    }
}

/// A grid point not checked because the bound's hypotheses fail there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub bound: BoundId,
    pub point: Point<f64>,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn of(reports: &[CheckReport], skipped: usize) -> Self {
        let mut s = Summary {
            skipped,
            ..Summary::default()
        };
        for r in reports {
            match r.verdict {
                Verdict::Holds => s.holds += 1,
                Verdict::Violated => s.violated += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub reports: Vec<CheckReport>,
    pub skipped: Vec<Skipped>,
    pub summary: Summary,
}

fn spec_key(s: &IntegralSpec<f64>) -> [u64; 4] {
    [s.mu.to_bits(), s.ord.to_bits(), s.gamma.to_bits(), s.x.to_bits()]
}

/// Checks every bound in `ids` at every admissible grid point. Each distinct
/// integral is computed once and shared between bounds. Failures at single
/// points are reported as inconclusive with the reason in `note`. Runs on the
/// current rayon pool; the output order does not depend on scheduling.
pub fn sweep(ids: &[BoundId], grid: &Grid, opts: &CheckOptions) -> Result<SweepOutcome> {
    check_tol(opts.tol)?;
    let mut ids: Vec<BoundId> = ids.to_vec();
    ids.sort();
    ids.dedup();

    let mut admitted: Vec<(BoundId, Point<f64>, Direction)> = Vec::new();
    let mut skipped = Vec::new();
    for &id in &ids {
        for p in grid.points_for(id) {
            match admit(id, &p, opts.exploratory) {
                Ok(d) => admitted.push((id, p, d)),
                Err(e) => skipped.push(Skipped {
                    bound: id,
                    point: p,
                    reason: e.to_string(),
                }),
            }
        }
    }

    let mut specs: Vec<IntegralSpec<f64>> = admitted.iter().map(|(id, p, _)| id.target(p)).collect();
    specs.sort_by_key(spec_key);
    specs.dedup_by_key(|s| spec_key(s));
    let tol = oracle_tol(opts.tol);
    let cache: HashMap<[u64; 4], std::result::Result<QuadResult<f64>, Error>> = specs
        .par_iter()
        .map(|s| (spec_key(s), bessel_integral(s, tol)))
        .collect();

    let reports: Vec<CheckReport> = admitted
        .par_iter()
        .map(|&(id, p, direction)| {
            let oracle = &cache[&spec_key(&id.target(&p))];
            oracle
                .clone()
                .and_then(|q| judge(id, &p, direction, &q, opts))
                .unwrap_or_else(|e| failed_report(id, p, direction, e))
        })
        .collect();

    let summary = Summary::of(&reports, skipped.len());
    Ok(SweepOutcome {
        reports,
        skipped,
        summary,
    })
}

fn failed_report(id: BoundId, point: Point<f64>, direction: Direction, e: Error) -> CheckReport {
    CheckReport {
        bound: id,
        point,
        direction,
        bound_value: S::zero(),
        oracle_value: S::zero(),
        oracle_err: S::zero(),
        verdict: Verdict::Inconclusive,
        rel_margin: 0.0,
        uncertainty: f64::MAX,
        note: Some(format!("numerical failure: {e}")),
    }
}

/// Relative errors `|bound - F| / F` of one of the two-sided bounds with
/// `n = 0`, `γ = 0`, over `nu_values × x_values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelErrTable {
    pub bound: BoundId,
    pub nu_values: Vec<f64>,
    pub x_values: Vec<f64>,
    /// Rounded half-up to four decimals; `entries[i][j]` is at
    /// `(nu_values[i], x_values[j])`.
    pub entries: Vec<Vec<f64>>,
    /// The same errors before rounding.
    pub raw: Vec<Vec<f64>>,
}

pub fn round_half_up(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    // nudge by a few ulps so values printed as exact halves round up
    ((v * scale) * (1.0 + 4.0 * f64::EPSILON) + 0.5).floor() / scale
}

pub fn relative_error_table(bound: BoundId, nu_values: &[f64], x_values: &[f64]) -> Result<RelErrTable> {
    if !matches!(bound, BoundId::TwosidedL | BoundId::TwosidedU) {
        return Err(domain(format!(
            "tables are defined for twosided_l and twosided_u, not {bound}"
        )));
    }
    let cells: Vec<(usize, usize)> = (0..nu_values.len())
        .flat_map(|i| (0..x_values.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = Point::simple(nu_values[i], 0.0, x_values[j]);
            let b = bound_value(bound, &p, DEFAULT_SERIES_TOL)?;
            let f = bessel_integral(&bound.target(&p), clamp_tol(1e-13))?;
            Ok(b.value.rel_diff(&f.value).abs())
        })
        .collect();
    let mut raw = vec![vec![0.0; x_values.len()]; nu_values.len()];
    for (&(i, j), v) in cells.iter().zip(values) {
        raw[i][j] = v?;
    }
    let entries = raw
        .iter()
        .map(|row| row.iter().map(|&v| round_half_up(v, 4)).collect())
        .collect();
    Ok(RelErrTable {
        bound,
        nu_values: nu_values.to_vec(),
        x_values: x_values.to_vec(),
        entries,
        raw,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessSample {
    pub x: f64,
    /// Bound divided by the integral.
    pub ratio: f64,
}

/// `bound / integral` along `xs`, with the other coordinates from `template`.
pub fn tightness_scan(id: BoundId, template: &Point<f64>, xs: &[f64], tol: f64) -> Result<Vec<TightnessSample>> {
    check_tol(tol)?;
    xs.iter()
        .map(|&x| {
            let p = template.with_x(x);
            let b = bound_value(id, &p, DEFAULT_SERIES_TOL)?;
            let f = bessel_integral(&id.target(&p), oracle_tol(tol))?;
            Ok(TightnessSample {
                x,
                ratio: b.value.ratio(&f.value),
            })
        })
        .collect()
}

/// Sign change of `∫₀ˣ e^{-γt} t^μ I_ν dt - e^{-γx} x^μ I_ν(x) / (1-γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// Midpoint of the final bracket.
    pub x_star: f64,
    /// The difference is negative at `lo` and positive at `hi`.
    pub lo: f64,
    pub hi: f64,
}

const CROSSOVER_REL_WIDTH: f64 = 1e-6;
const CROSSOVER_SCAN_START: f64 = 1e-6;
const CROSSOVER_POINTS_PER_DECADE: f64 = 20.0;

/// Sign of `F - e^{-γx} x^μ I_ν(x) / (1-γ)`.
fn crossover_sign(mu: f64, nu: f64, gamma: f64, x: f64) -> Result<i8> {
    let f = bessel_integral(&IntegralSpec::new(mu, nu, gamma, x), clamp_tol(1e-13))?.value;
    let b = (S::from_log(-gamma * x + mu * x.ln()) * besseli(nu, x)?).scale(1.0 / (1.0 - gamma));
    Ok((f - b).sign())
}

/// Locates the point beyond which the integral exceeds
/// `e^{-γx} x^μ I_ν(x) / (1-γ)`.
///
/// Returns `None` when `μ ≥ ν ≥ 1/2`, where the integral stays below for all
/// `x`. For `μ < 1/2` a crossing must exist; `NotFound` means it lies beyond
/// `x_max`. For other parameters nothing is known in advance: the scan runs
/// and returns `None` if it finds no crossing.
pub fn find_crossover(mu: f64, nu: f64, gamma: f64, x_max: f64) -> Result<Option<Crossover>> {
    if !(mu + nu > -1.0) {
        return Err(domain(format!(
            "crossover requires mu + nu > -1, got mu = {mu}, nu = {nu}"
        )));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(domain(format!(
            "crossover requires 0 <= gamma < 1, got gamma = {gamma}"
        )));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(domain(format!("crossover requires finite x_max > 0, got {x_max}")));
    }
    if mu >= nu && nu >= 0.5 {
        return Ok(None);
    }
    let start = CROSSOVER_SCAN_START * x_max.min(1.0);
    let decades = (x_max / start).log10();
    let count = (decades * CROSSOVER_POINTS_PER_DECADE).ceil().max(2.0) as usize + 1;
    let xs = logspace(start, x_max, count);
    let signs: Vec<i8> = xs
        .iter()
        .map(|&x| crossover_sign(mu, nu, gamma, x))
        .collect::<Result<_>>()?;

    // last non-positive sample followed by positive ones up to x_max
    let last_neg = signs.iter().rposition(|&s| s <= 0);
    let (mut lo, mut hi) = match last_neg {
        Some(i) if i + 1 < xs.len() => (xs[i], xs[i + 1]),
        Some(_) => {
            return if mu < 0.5 {
                Err(Error::NotFound { x_max })
            } else {
                Ok(None)
            };
        }
        None => (0.0, xs[0]),
    };
    while hi - lo > CROSSOVER_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if crossover_sign(mu, nu, gamma, mid)? > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(Crossover {
        x_star: 0.5 * (lo + hi),
        lo,
        hi,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_examples() {
        let r = check_point(BoundId::Main, &Point::simple(-0.25, 0.5, 10.0), 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let r = check_point(BoundId::New1, &Point::new(1.0, -1.0, 0.0, 0.0, 3.0), 1e-10).unwrap();
        assert_eq!(r.direction, Direction::Equality);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let opts = CheckOptions {
            exploratory: true,
            ..CheckOptions::default()
        };
        let r = check_point_with(BoundId::Prop1, &Point::new(0.0, 0.0, 0.0, 0.0, 100.0), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.note.is_some());
        assert!(check_point(BoundId::Prop1, &Point::new(0.0, 0.0, 0.0, 0.0, 100.0), 1e-10).is_err());
    }

    #[test]
    fn empty_sweep() {
        let grid = Grid {
            nu: vec![],
            n: vec![],
            mu: vec![],
            gamma: vec![],
            x: vec![],
        };
        let out = sweep(&BoundId::ALL, &grid, &CheckOptions::default()).unwrap();
        assert!(out.reports.is_empty());
        assert_eq!(out.summary, Summary::default());
    }

    #[test]
    fn sweep_skips_out_of_domain_points() {
        let grid = Grid {
            nu: vec![0.0, 1.0],
            n: vec![0.0],
            mu: vec![0.0],
            gamma: vec![0.3],
            x: vec![2.0],
        };
        let out = sweep(&[BoundId::Lower2], &grid, &CheckOptions::default()).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.skipped.len(), 1);
        assert!(out.skipped[0].reason.contains("nu > 1/2"));
        assert_eq!(out.summary.holds, 1);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_up(0.05275, 4), 0.0528);
        assert_eq!(round_half_up(0.0002449, 4), 0.0002);
        assert_eq!(round_half_up(0.00005, 4), 0.0001);
    }

    #[test]
    fn logspace_endpoints() {
        let xs = logspace(1e-3, 200.0, 24);
        assert_eq!(xs.len(), 24);
        assert_eq!(xs[0], 1e-3);
        assert_eq!(xs[23], 200.0);
    }

    #[test]
    fn crossover_without_guarantee_cases() {
        assert_eq!(find_crossover(1.0, 1.0, 0.3, 100.0).unwrap(), None);
        assert!(find_crossover(-1.0, -0.5, 0.0, 10.0).is_err());
    }
}
