//! Problem files, end-to-end runs and output.
//!
//! A problem file is UTF-8 text with one `key = value` per line. `#` starts a
//! comment. Expressions may be wrapped in double quotes.
//!
//! ```text
//! kind   = fredholm          # or volterra
//! lambda = 1                 # beta for volterra
//! kernel = exp(t - s)
//! f      = e^(t + 1)
//! m      = 0
//! n      = 1
//! ics    = 1                 # y(0), y'(0), ...; exactly max(m, n) values
//! r      = 2
//! q      = 1
//! exact  = exp(t)            # optional
//! grid   = 0, 0.25, 0.5      # optional, default 0.0, 0.1, ..., 0.9
//! ```

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::basis::{reconstruct, BasisConfig};
use crate::error::Result;
use crate::expr::Expr;
use crate::lift::InitialConditions;
use crate::solver::{
    error_bound, max_abs_derivative, solve, AssembledSystem, EquationKind, SolveOptions,
    SolveReport,
};

const KEYS: &[&str] = &[
    "kind", "lambda", "beta", "kernel", "f", "m", "n", "ics", "r", "q", "exact", "grid",
];

/// A problem-file diagnostic: `file:line:column: message`.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ProblemError {
    pub file: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: EquationKind,
    /// `λ` for Fredholm, `β` for Volterra.
    pub scalar: f64,
    pub kernel: Expr,
    pub forcing: Expr,
    pub m: usize,
    pub n: usize,
    pub initial_conditions: Vec<f64>,
    pub r: usize,
    pub q: usize,
    pub exact: Option<Expr>,
    pub grid: Option<Vec<f64>>,
}

pub fn default_grid() -> Vec<f64> {
    uniform_grid(10)
}

/// `i / size` for `i = 0..size`.
pub fn uniform_grid(size: usize) -> Vec<f64> {
    (0..size).map(|i| i as f64 / size as f64).collect()
}

struct Entry {
    line: usize,
    /// 1-based column of the first value byte
    column: usize,
    value: String,
}

pub fn load_problem(path: impl AsRef<Path>) -> std::result::Result<ProblemSpec, ProblemError> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ProblemError {
        file: label.clone(),
        line: None,
        column: None,
        message: format!("cannot read problem file: {e}"),
    })?;
    parse_problem(&text, &label)
}

/// Parses problem text; `file` labels diagnostics.
pub fn parse_problem(text: &str, file: &str) -> std::result::Result<ProblemSpec, ProblemError> {
    let err = |line: Option<usize>, column: Option<usize>, message: String| ProblemError {
        file: file.to_string(),
        line,
        column,
        message,
    };

    let mut entries: HashMap<&'static str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(err(Some(line), Some(col), "expected `key = value`".into()));
        };
        let key_raw = content[..eq].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        let Some(&key) = KEYS.iter().find(|k| **k == key_raw) else {
            return Err(err(
                Some(line),
                Some(key_col),
                format!(
                    "unknown key `{key_raw}` (expected one of {})",
                    KEYS.join(", ")
                ),
            ));
        };
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let mut value = after.trim();
        let mut column = eq + 1 + lead + 1;
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
            column += 1;
        }
        if let Some(prev) = entries.get(key) {
            return Err(err(
                Some(line),
                Some(key_col),
                format!("duplicate key `{key}` (first set on line {})", prev.line),
            ));
        }
        entries.insert(
            key,
            Entry {
                line,
                column,
                value: value.to_string(),
            },
        );
    }

    let required = |key: &str| {
        entries
            .get(key)
            .ok_or_else(|| err(None, None, format!("missing required key `{key}`")))
    };
    let integer = |key: &str, min: usize| -> std::result::Result<usize, ProblemError> {
        let e = required(key)?;
        match e.value.parse::<usize>() {
            Ok(v) if v >= min => Ok(v),
            _ => Err(err(
                Some(e.line),
                Some(e.column),
                format!("`{key}` must be an integer ≥ {min}, found `{}`", e.value),
            )),
        }
    };
    let real_list = |e: &Entry, key: &str| -> std::result::Result<Vec<f64>, ProblemError> {
        let inner = e
            .value
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .trim();
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        inner
            .split(',')
            .map(|item| {
                item.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        err(
                            Some(e.line),
                            Some(e.column),
                            format!(
                                "`{key}` must be comma-separated reals, found `{}`",
                                item.trim()
                            ),
                        )
                    })
            })
            .collect()
    };
    let expression = |key: &str, allow_s: bool| -> std::result::Result<Expr, ProblemError> {
        let e = required(key)?;
        let expr = Expr::parse(&e.value).map_err(|pe| {
            err(
                Some(e.line),
                Some(e.column + pe.offset()),
                format!("in `{key}`: {pe}"),
            )
        })?;
        if !allow_s && expr.uses_s() {
            return Err(err(
                Some(e.line),
                Some(e.column),
                format!("`{key}` is a function of t only and may not use `s`"),
            ));
        }
        Ok(expr)
    };

    let kind_entry = required("kind")?;
    let kind = match kind_entry.value.as_str() {
        "fredholm" => EquationKind::Fredholm,
        "volterra" => EquationKind::Volterra,
        other => {
            return Err(err(
                Some(kind_entry.line),
                Some(kind_entry.column),
                format!("`kind` must be `fredholm` or `volterra`, found `{other}`"),
            ))
        }
    };
    let (scalar_key, other_key) = match kind {
        EquationKind::Fredholm => ("lambda", "beta"),
        EquationKind::Volterra => ("beta", "lambda"),
    };
    if let Some(e) = entries.get(other_key) {
        return Err(err(
            Some(e.line),
            Some(1),
            format!("`{other_key}` does not apply to a {kind} problem; use `{scalar_key}`"),
        ));
    }
    let scalar_entry = required(scalar_key)?;
    let scalar = scalar_entry
        .value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            err(
                Some(scalar_entry.line),
                Some(scalar_entry.column),
                format!(
                    "`{scalar_key}` must be a real number, found `{}`",
                    scalar_entry.value
                ),
            )
        })?;

    let kernel = expression("kernel", true)?;
    let forcing = expression("f", false)?;
    let exact = if entries.contains_key("exact") {
        Some(expression("exact", false)?)
    } else {
        None
    };
    let m = integer("m", 0)?;
    let n = integer("n", 0)?;
    let r = integer("r", 1)?;
    let q = integer("q", 1)?;

    let initial_conditions = match entries.get("ics") {
        Some(e) => real_list(e, "ics")?,
        None => Vec::new(),
    };
    let needed = m.max(n);
    if initial_conditions.len() != needed {
        let (line, column) = entries
            .get("ics")
            .map_or((None, None), |e| (Some(e.line), Some(e.column)));
        return Err(err(
            line,
            column,
            format!(
                "`ics` has {} value(s), but derivative orders m = {m}, n = {n} need conditions \
                 y(0), ..., y^(l)(0) with l = max(m, n) - 1, i.e. exactly {needed}",
                initial_conditions.len()
            ),
        ));
    }

    let grid = match entries.get("grid") {
        Some(e) => {
            let g = real_list(e, "grid")?;
            if let Some(bad) = g.iter().find(|t| !(0.0..1.0).contains(*t)) {
                return Err(err(
                    Some(e.line),
                    Some(e.column),
                    format!("grid point {bad} lies outside [0, 1)"),
                ));
            }
            Some(g)
        }
        None => None,
    };

    Ok(ProblemSpec {
        kind,
        scalar,
        kernel,
        forcing,
        m,
        n,
        initial_conditions,
        r,
        q,
        exact,
        grid,
    })
}

/// Overrides and solver settings for [`run`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub r: Option<usize>,
    pub q: Option<usize>,
    pub solve: SolveOptions,
    /// Replaces the problem's grid with `i / size`, `i = 0..size`.
    pub grid_size: Option<usize>,
    /// User-supplied `M` for the error bound.
    pub bound_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub t: f64,
    pub y_approx: f64,
    pub y_exact: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    Supplied,
    /// Finite-difference estimate from the exact solution.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInfo {
    pub mu: usize,
    pub m: f64,
    pub source: BoundSource,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub kind: EquationKind,
    pub config: BasisConfig,
    pub report: SolveReport,
    pub rows: Vec<GridRow>,
    pub bound: Option<BoundInfo>,
}

impl RunOutput {
    pub fn max_abs_error(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.abs_error)
            .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
            .filter(|_| !self.rows.is_empty())
    }
}

/// Grid points of the derivative-maximum estimate for `M`.
const BOUND_GRID: usize = 1001;
const BOUND_STEP: f64 = 1e-2;

/// Projects, assembles, solves and evaluates on the grid.
///
/// With `μ = r - 1`, the bound uses `M = max |y⁽ᵘ⁾|` estimated from the exact
/// solution, unless `M` is supplied.
pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<RunOutput> {
    let r = opts.r.unwrap_or(spec.r);
    let q = opts.q.unwrap_or(spec.q);
    let config = BasisConfig::new(q, r)?;
    let kernel = &spec.kernel;
    let forcing = &spec.forcing;
    let sys = AssembledSystem::from_functions(
        &config,
        spec.kind,
        spec.scalar,
        |t, s| Ok(kernel.eval(t, Some(s))?),
        |t| Ok(forcing.eval(t, None)?),
        spec.m,
        spec.n,
        InitialConditions::new(spec.initial_conditions.clone()),
    )?;
    let report = solve(&sys, opts.solve)?;

    let grid = match opts.grid_size {
        Some(size) => uniform_grid(size),
        None => spec.grid.clone().unwrap_or_else(default_grid),
    };
    let rows = grid
        .iter()
        .map(|&t| {
            let y_approx = reconstruct(&report.y, t)?;
            let y_exact = spec.exact.as_ref().map(|e| e.eval(t, None)).transpose()?;
            Ok(GridRow {
                t,
                y_approx,
                y_exact,
                abs_error: y_exact.map(|e| (y_approx - e).abs()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mu = r - 1;
    let bound = match (opts.bound_m, &spec.exact) {
        (Some(m), _) => Some((m, BoundSource::Supplied)),
        (None, Some(exact)) => Some((
            max_abs_derivative(|t| Ok(exact.eval(t, None)?), mu, BOUND_GRID, BOUND_STEP)?,
            BoundSource::Estimated,
        )),
        (None, None) => None,
    }
    .map(|(m, source)| BoundInfo {
        mu,
        m,
        source,
        value: error_bound(mu, m),
    });

    Ok(RunOutput {
        kind: spec.kind,
        config,
        report,
        rows,
        bound,
    })
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text: header `t,y_approx,y_exact,abs_error`, LF endings, 17 significant
/// digits, blank exact columns when there is no exact solution.
pub fn csv_string(out: &RunOutput) -> String {
    let mut s = String::from("t,y_approx,y_exact,abs_error\n");
    for row in &out.rows {
        let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            sig17(row.t),
            sig17(row.y_approx),
            opt(row.y_exact),
            opt(row.abs_error)
        );
    }
    s
}

pub fn emit_csv(out: &RunOutput, path: impl AsRef<Path>) -> std::io::Result<()> {
    let path = path.as_ref();
    std::fs::write(path, csv_string(out))
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))
}

/// Human-readable summary: coefficients, solver diagnostics and the bound.
pub fn report_string(out: &RunOutput) -> String {
    let mut s = String::new();
    let c = out.config;
    let rep = &out.report;
    let _ = writeln!(s, "problem kind: {}", out.kind);
    let _ = writeln!(
        s,
        "basis: r = {}, q = {} (dimension {})",
        c.r(),
        c.q(),
        c.dim()
    );
    let _ = writeln!(
        s,
        "solver: {} after {} Newton iteration(s), residual ‖R‖∞ = {:e}",
        if rep.converged {
            "converged"
        } else {
            "NOT converged"
        },
        rep.iterations,
        rep.residual_norm
    );
    let _ = writeln!(s, "coefficients Y:");
    for k in 0..c.q() {
        let block: Vec<String> = (0..c.r())
            .map(|m| format!("{:.9}", rep.y[c.index(k, m)]))
            .collect();
        let _ = writeln!(s, "  block {}: {}", k + 1, block.join(", "));
    }
    if let Some(max) = out.max_abs_error() {
        let _ = writeln!(s, "max grid error: {max:e}");
    }
    match out.bound {
        Some(b) => {
            let src = match b.source {
                BoundSource::Supplied => "supplied",
                BoundSource::Estimated => "estimated from exact solution",
            };
            let _ = writeln!(
                s,
                "error bound: M / (2^(2μ+1) (μ+1)!) = {:.6} with μ = {}, M = {:.6} ({src})",
                b.value, b.mu, b.m
            );
        }
        None => {
            let _ = writeln!(
                s,
                "error bound: not available (no exact solution or M given)"
            );
        }
    }
    s
}
