mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use incbessel::bounds::{bound_value, bound_value_exploratory, DEFAULT_SERIES_TOL};
use incbessel::oracle::{bessel_integral, tol_range};
use incbessel::verifier::{
    check_point_with, find_crossover, logspace, relative_error_table, sweep, tightness_scan, CheckOptions, Grid,
    Summary, Verdict,
};
use incbessel::{BoundId, Error, IntegralSpec, Point};
use serde_json::{json, Value};

use render::{Column, Format, Kind, Output};

const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "incbessel",
    version,
    about = "Evaluate and certify bounds on ∫₀ˣ e^(-γt) t^μ I_(ν+n)(t) dt"
)]
struct Cli {
    /// Output format; `table` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Relative tolerance in [1e-13, 1e-6].
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = parse_tol)]
    tol: f64,
    /// Worker threads for sweeps and tables (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute ∫₀ˣ e^(-γt) t^μ I_ord(t) dt.
    Eval(EvalArgs),
    /// Evaluate a closed-form bound.
    Bound(PointArgs),
    /// Compare bounds with the integral at the given points.
    Check(PointArgs),
    /// Check bounds over a grid; axes left out use the standard grid.
    Sweep(SweepArgs),
    /// Relative-error table of twosided_l or twosided_u (γ = 0, n = 0).
    Table(TableArgs),
    /// Ratio bound / integral along a sequence of x.
    Tightness(PointArgs),
    /// Locate where the integral overtakes e^(-γx) x^μ I_ν(x) / (1-γ).
    Crossover(CrossoverArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    mu: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    ord: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    gamma: Vec<Vec<f64>>,
    #[command(flatten)]
    x: XArgs,
}

#[derive(Args, Debug)]
struct XArgs {
    /// Comma-separated values of x.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    x: Option<Vec<Vec<f64>>>,
    /// `lo,hi,count`: log-spaced values of x.
    #[arg(long, value_parser = parse_logspace, conflicts_with = "x")]
    x_logspace: Option<Vec<Vec<f64>>>,
}

impl XArgs {
    fn values(&self) -> Option<Vec<f64>> {
        self.x.as_deref().or(self.x_logspace.as_deref()).map(flat)
    }
}

#[derive(Args, Debug)]
struct PointArgs {
    /// Bound ids, comma-separated (e.g. main,new1,twosided_l).
    #[arg(long, value_parser = parse_bounds)]
    bound: Vec<Vec<BoundId>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    nu: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "0")]
    n: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "0")]
    mu: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "0")]
    gamma: Vec<Vec<f64>>,
    #[command(flatten)]
    x: XArgs,
    /// Admit points outside the bound's hypotheses.
    #[arg(long)]
    exploratory: bool,
    /// Relative truncation tolerance of series bounds.
    #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
    series_tol: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Bound ids, comma-separated, or `all`.
    #[arg(long, value_parser = parse_bounds, default_value = "all")]
    bound: Vec<Vec<BoundId>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    nu: Option<Vec<Vec<f64>>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    n: Option<Vec<Vec<f64>>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    mu: Option<Vec<Vec<f64>>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    gamma: Option<Vec<Vec<f64>>>,
    #[command(flatten)]
    x: XArgs,
    #[arg(long)]
    exploratory: bool,
    /// Print only violated and inconclusive reports.
    #[arg(long)]
    failures_only: bool,
    /// Also list grid points skipped by the hypotheses.
    #[arg(long)]
    show_skipped: bool,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, value_parser = parse_bounds)]
    bound: Vec<Vec<BoundId>>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    nu: Vec<Vec<f64>>,
    #[command(flatten)]
    x: XArgs,
}

#[derive(Args, Debug)]
struct CrossoverArgs {
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    nu: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 100.0)]
    x_max: f64,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| format!("'{t}' is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("'{t}' is not finite"))
            }
        })
        .collect()
}

fn parse_logspace(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected lo,hi,count".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| "lo is not a number")?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| "hi is not a number")?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| "count is not a nonnegative integer")?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err("need 0 < lo <= hi".into());
    }
    Ok(logspace(lo, hi, count))
}

fn parse_bounds(s: &str) -> Result<Vec<BoundId>, String> {
    if s.trim() == "all" {
        return Ok(BoundId::ALL.to_vec());
    }
    s.split(',')
        .map(|t| t.parse::<BoundId>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    let (lo, hi) = tol_range::<f64>();
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(format!("tolerance must lie in [{lo:e}, {hi:e}]"))
    }
}

/// `Vec<Vec<T>>` from repeated list flags, flattened.
fn flat<T: Clone>(v: &[Vec<T>]) -> Vec<T> {
    v.iter().flatten().cloned().collect()
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDomain(_) | Error::InvalidOrder { .. } => Failure::Usage(e.to_string()),
            Error::NonConvergence { .. } | Error::NotFound { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok((out, violated)) => {
            let format = cli.format.unwrap_or(if out.command == "table" {
                Format::Csv
            } else {
                Format::Json
            });
            print!("{}", render::render(&out, format));
            if violated {
                ExitCode::from(EXIT_VIOLATED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `incbessel help` for the grammar");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn run(cli: &Cli) -> Result<(Output, bool), Failure> {
    match &cli.command {
        Command::Eval(a) => eval(a, cli.tol).map(|o| (o, false)),
        Command::Bound(a) => bound(a).map(|o| (o, false)),
        Command::Check(a) => check(a, cli.tol),
        Command::Sweep(a) => run_sweep(a, cli.tol),
        Command::Table(a) => table(a).map(|o| (o, false)),
        Command::Tightness(a) => tightness(a, cli.tol).map(|o| (o, false)),
        Command::Crossover(a) => crossover(a).map(|o| (o, false)),
    }
}

fn require<T: Clone>(name: &str, v: &[Vec<T>]) -> Result<Vec<T>, Failure> {
    let f = flat(v);
    if f.is_empty() {
        Err(Failure::Usage(format!("--{name} is required")))
    } else {
        Ok(f)
    }
}

fn require_x(x: &XArgs) -> Result<Vec<f64>, Failure> {
    match x.values() {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Failure::Usage("--x or --x-logspace is required".into())),
    }
}

fn eval(a: &EvalArgs, tol: f64) -> Result<Output, Failure> {
    let (mus, ords, gammas) = (
        require("mu", &a.mu)?,
        require("ord", &a.ord)?,
        require("gamma", &a.gamma)?,
    );
    let xs = require_x(&a.x)?;
    let mut results = Vec::new();
    for &mu in &mus {
        for &ord in &ords {
            for &gamma in &gammas {
                for &x in &xs {
                    let spec = IntegralSpec::new(mu, ord, gamma, x);
                    let q = bessel_integral(&spec, tol)?;
                    results.push(json!({
                        "mu": mu, "ord": ord, "gamma": gamma, "x": x,
                        "value": render::to_value(&q.value),
                        "abs_err": render::to_value(&q.abs_err),
                        "segments": q.segments,
                        "converged": q.converged,
                    }));
                }
            }
        }
    }
    let count = results.len();
    Ok(Output {
        command: "eval",
        parameters: json!({"mu": mus, "ord": ords, "gamma": gammas, "x": xs, "tol": tol}),
        results,
        summary: json!({"count": count}),
        columns: vec![
            Column::new("mu", "mu", Kind::Number),
            Column::new("ord", "ord", Kind::Number),
            Column::new("gamma", "gamma", Kind::Number),
            Column::new("x", "x", Kind::Number),
            Column::new("value", "value", Kind::Scaled),
            Column::new("abs_err", "abs_err", Kind::Scaled),
            Column::new("segments", "segments", Kind::Number),
            Column::new("converged", "converged", Kind::Text),
        ],
    })
}

struct Expanded {
    ids: Vec<BoundId>,
    points: Vec<Point>,
}

fn expand(a: &PointArgs) -> Result<Expanded, Failure> {
    let ids = require("bound", &a.bound)?;
    let nus = require("nu", &a.nu)?;
    let xs = require_x(&a.x)?;
    let mut points = Vec::new();
    for &nu in &nus {
        for &n in &flat(&a.n) {
            for &mu in &flat(&a.mu) {
                for &gamma in &flat(&a.gamma) {
                    for &x in &xs {
                        points.push(Point::new(nu, n, mu, gamma, x));
                    }
                }
            }
        }
    }
    Ok(Expanded { ids, points })
}

fn point_params(a: &PointArgs, e: &Expanded) -> Value {
    json!({
        "bound": e.ids,
        "nu": flat(&a.nu), "n": flat(&a.n), "mu": flat(&a.mu), "gamma": flat(&a.gamma),
        "x": a.x.values(),
        "exploratory": a.exploratory,
        "series_tol": a.series_tol,
    })
}

fn point_columns() -> Vec<Column> {
    vec![
        Column::new("bound", "bound", Kind::Text),
        Column::new("nu", "point.nu", Kind::Number),
        Column::new("n", "point.n", Kind::Number),
        Column::new("mu", "point.mu", Kind::Number),
        Column::new("gamma", "point.gamma", Kind::Number),
        Column::new("x", "point.x", Kind::Number),
    ]
}

fn bound(a: &PointArgs) -> Result<Output, Failure> {
    let e = expand(a)?;
    let mut results = Vec::new();
    for &id in &e.ids {
        for p in &e.points {
            let b = if a.exploratory {
                bound_value_exploratory(id, p, a.series_tol)?
            } else {
                bound_value(id, p, a.series_tol)?
            };
            let direction = if a.exploratory {
                id.validate_exploratory(p)?
            } else {
                id.validate(p)?
            };
            let mut v = render::to_value(&b);
            v["direction"] = render::to_value(&direction);
            results.push(v);
        }
    }
    let mut columns = point_columns();
    columns.extend([
        Column::new("direction", "direction", Kind::Text),
        Column::new("value", "value", Kind::Scaled),
        Column::new("truncation_terms", "truncation_terms", Kind::Number),
        Column::new("tail_bound", "tail_bound", Kind::Scaled),
        Column::new("rel_uncertainty", "rel_uncertainty", Kind::Number),
    ]);
    let count = results.len();
    Ok(Output {
        command: "bound",
        parameters: point_params(a, &e),
        results,
        summary: json!({"count": count}),
        columns,
    })
}

fn report_columns() -> Vec<Column> {
    let mut c = point_columns();
    c.extend([
        Column::new("direction", "direction", Kind::Text),
        Column::new("verdict", "verdict", Kind::Text),
        Column::new("rel_margin", "rel_margin", Kind::Number),
        Column::new("uncertainty", "uncertainty", Kind::Number),
        Column::new("bound_value", "bound_value", Kind::Scaled),
        Column::new("oracle_value", "oracle_value", Kind::Scaled),
        Column::new("oracle_err", "oracle_err", Kind::Scaled),
        Column::new("note", "note", Kind::Text),
    ]);
    c
}

fn check(a: &PointArgs, tol: f64) -> Result<(Output, bool), Failure> {
    let e = expand(a)?;
    let opts = CheckOptions {
        tol,
        series_tol: a.series_tol,
        exploratory: a.exploratory,
    };
    let mut reports = Vec::new();
    for &id in &e.ids {
        for p in &e.points {
            reports.push(check_point_with(id, p, &opts)?);
        }
    }
    let summary = Summary::of(&reports, 0);
    Ok((
        Output {
            command: "check",
            parameters: {
                let mut p = point_params(a, &e);
                p["tol"] = json!(tol);
                p
            },
            results: reports.iter().map(render::to_value).collect(),
            summary: render::to_value(&summary),
            columns: report_columns(),
        },
        summary.violated > 0,
    ))
}

fn run_sweep(a: &SweepArgs, tol: f64) -> Result<(Output, bool), Failure> {
    let std = Grid::standard();
    let grid = Grid {
        nu: a.nu.as_deref().map(flat).unwrap_or(std.nu),
        n: a.n.as_deref().map(flat).unwrap_or(std.n),
        mu: a.mu.as_deref().map(flat).unwrap_or(std.mu),
        gamma: a.gamma.as_deref().map(flat).unwrap_or(std.gamma),
        x: a.x.values().unwrap_or(std.x),
    };
    let ids = flat(&a.bound);
    let opts = CheckOptions {
        tol,
        exploratory: a.exploratory,
        ..CheckOptions::default()
    };
    let out = sweep(&ids, &grid, &opts)?;
    let results: Vec<Value> = out
        .reports
        .iter()
        .filter(|r| !a.failures_only || r.verdict != Verdict::Holds)
        .map(render::to_value)
        .collect();
    let mut summary = render::to_value(&out.summary);
    if a.show_skipped {
        summary["skipped_points"] = render::to_value(&out.skipped);
    }
    Ok((
        Output {
            command: "sweep",
            parameters: json!({
                "bound": ids, "nu": grid.nu, "n": grid.n, "mu": grid.mu, "gamma": grid.gamma, "x": grid.x,
                "tol": tol, "exploratory": a.exploratory, "failures_only": a.failures_only,
            }),
            results,
            summary,
            columns: report_columns(),
        },
        out.summary.violated > 0,
    ))
}

fn table(a: &TableArgs) -> Result<Output, Failure> {
    let ids = require("bound", &a.bound)?;
    let [id] = ids[..] else {
        return Err(Failure::Usage("table takes exactly one bound".into()));
    };
    let nus = require("nu", &a.nu)?;
    let xs = require_x(&a.x)?;
    let t = relative_error_table(id, &nus, &xs)?;
    let mut columns = vec![Column::new("nu", "nu", Kind::Text)];
    let mut results = Vec::new();
    for (j, x) in xs.iter().enumerate() {
        columns.push(Column::new(&format!("x={x}"), &format!("e{j}"), Kind::Fixed4));
    }
    for (i, nu) in nus.iter().enumerate() {
        let mut row = json!({"nu": nu});
        for j in 0..xs.len() {
            row[format!("e{j}")] = json!(t.entries[i][j]);
        }
        results.push(row);
    }
    Ok(Output {
        command: "table",
        parameters: json!({"bound": id, "nu": nus, "x": xs}),
        results,
        summary: render::to_value(&t),
        columns,
    })
}

fn tightness(a: &PointArgs, tol: f64) -> Result<Output, Failure> {
    let e = expand(a)?;
    let xs = require_x(&a.x)?;
    let mut results = Vec::new();
    for &id in &e.ids {
        for &nu in &flat(&a.nu) {
            for &n in &flat(&a.n) {
                for &mu in &flat(&a.mu) {
                    for &gamma in &flat(&a.gamma) {
                        let template = Point::new(nu, n, mu, gamma, xs[0]);
                        for s in tightness_scan(id, &template, &xs, tol)? {
                            results.push(json!({
                                "bound": id, "nu": nu, "n": n, "mu": mu, "gamma": gamma,
                                "x": s.x, "ratio": s.ratio,
                            }));
                        }
                    }
                }
            }
        }
    }
    let count = results.len();
    Ok(Output {
        command: "tightness",
        parameters: point_params(a, &e),
        results,
        summary: json!({"count": count}),
        columns: vec![
            Column::new("bound", "bound", Kind::Text),
            Column::new("nu", "nu", Kind::Number),
            Column::new("n", "n", Kind::Number),
            Column::new("mu", "mu", Kind::Number),
            Column::new("gamma", "gamma", Kind::Number),
            Column::new("x", "x", Kind::Number),
            Column::new("ratio", "ratio", Kind::Number),
        ],
    })
}

fn crossover(a: &CrossoverArgs) -> Result<Output, Failure> {
    let result = match find_crossover(a.mu, a.nu, a.gamma, a.x_max) {
        Ok(Some(c)) => json!({"status": "found", "x_star": c.x_star, "lo": c.lo, "hi": c.hi}),
        Ok(None) => json!({"status": "none"}),
        Err(Error::NotFound { x_max }) => json!({"status": "not_found", "x_max": x_max}),
        Err(e) => return Err(e.into()),
    };
    Ok(Output {
        command: "crossover",
        parameters: json!({"mu": a.mu, "nu": a.nu, "gamma": a.gamma, "x_max": a.x_max}),
        summary: json!({"status": result["status"].clone()}),
        results: vec![result],
        columns: vec![
            Column::new("status", "status", Kind::Text),
            Column::new("x_star", "x_star", Kind::Number),
            Column::new("lo", "lo", Kind::Number),
            Column::new("hi", "hi", Kind::Number),
        ],
    })
}
