//! Comparison tables and the CSV emitter.
//!
//! The CSV schema is fixed: `x,t,cadm,crdtm,exact,err_cadm,err_crdtm,bound`.
//! Columns a given run does not produce are left empty rather than omitted,
//! so plotting scripts can rely on the header. Rows are emitted in row-major
//! order (t outer, x inner) and all numbers use 17 significant digits, which
//! round-trips f64 exactly; re-running with identical inputs is
//! byte-identical.

use std::io;

use cfpde::cadm::cadm_solve;
use cfpde::crdtm::crdtm_solve;
use cfpde::problem::ProblemSpec;
use cfpde::rational::{rat_f64, rat_int};
use cfpde::Error;

use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Cadm,
    Crdtm,
    Both,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method, String> {
        match s {
            "cadm" => Ok(Method::Cadm),
            "crdtm" => Ok(Method::Crdtm),
            "both" => Ok(Method::Both),
            other => Err(format!(
                "unknown method `{other}` (use cadm, crdtm or both)"
            )),
        }
    }

    pub fn wants_cadm(self) -> bool {
        matches!(self, Method::Cadm | Method::Both)
    }

    pub fn wants_crdtm(self) -> bool {
        matches!(self, Method::Crdtm | Method::Both)
    }
}

/// One grid point of a solve or compare run; absent values print as empty
/// CSV cells.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub x: f64,
    pub t: f64,
    pub cadm: Option<f64>,
    pub crdtm: Option<f64>,
    pub exact: Option<f64>,
    pub err_cadm: Option<f64>,
    pub err_crdtm: Option<f64>,
    pub bound: Option<f64>,
}

/// Grid of comparison rows plus per-method maximum absolute errors (present
/// when the problem declares an exact solution).
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    pub max_err_cadm: Option<f64>,
    pub max_err_crdtm: Option<f64>,
    /// Largest relative pointwise gap between the two methods.
    pub max_method_gap: f64,
}

/// Evaluates the chosen method(s) over the grid; value columns only.
pub fn solve_table(
    p: &ProblemSpec,
    m: usize,
    grid: &GridSpec,
    method: Method,
) -> Result<Vec<ReportRow>, Error> {
    let cadm = if method.wants_cadm() {
        Some(cadm_solve(p, m)?.series)
    } else {
        None
    };
    let crdtm = if method.wants_crdtm() {
        Some(crdtm_solve(p, m)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(grid.t_count * grid.x_count);
    for &t in &grid.ts() {
        for &x in &grid.xs() {
            rows.push(ReportRow {
                x,
                t,
                cadm: cadm
                    .as_ref()
                    .map(|s| s.eval(x, t))
                    .transpose()
                    .map_err(|e| at_point(x, t, e))?,
                crdtm: crdtm
                    .as_ref()
                    .map(|s| s.eval(x, t))
                    .transpose()
                    .map_err(|e| at_point(x, t, e))?,
                exact: None,
                err_cadm: None,
                err_crdtm: None,
                bound: None,
            });
        }
    }
    Ok(rows)
}

fn at_point(x: f64, t: f64, e: Error) -> Error {
    Error::domain(format!("at grid point (x = {x}, t = {t}): {e}"))
}

/// Solves with both methods and tabulates values, errors against the exact
/// solution when available, and the crude truncation bound
/// `|coeff_m(x)| * t^(m*alpha)` from the last computed grade.
pub fn error_table(p: &ProblemSpec, m: usize, grid: &GridSpec) -> Result<ErrorReport, Error> {
    let cadm = cadm_solve(p, m)?.series;
    let crdtm = crdtm_solve(p, m)?;
    let last = cadm.coeff(m);
    let bound_exp = rat_f64(&(p.alpha.clone() * rat_int(m as i64)));

    let mut rows = Vec::with_capacity(grid.t_count * grid.x_count);
    let mut max_err_cadm: Option<f64> = None;
    let mut max_err_crdtm: Option<f64> = None;
    let mut max_gap = 0.0f64;
    for &t in &grid.ts() {
        for &x in &grid.xs() {
            let va = cadm.eval(x, t).map_err(|e| at_point(x, t, e))?;
            let vr = crdtm.eval(x, t).map_err(|e| at_point(x, t, e))?;
            let tm = if m == 0 { 1.0 } else { t.powf(bound_exp) };
            let bound = last.eval_at(x).map_err(|e| at_point(x, t, e))?.abs() * tm;
            let exact = match &p.exact {
                Some(e) => Some(e.eval(x, t).map_err(|e| at_point(x, t, e))?),
                None => None,
            };
            let err_cadm = exact.map(|e| (va - e).abs());
            let err_crdtm = exact.map(|e| (vr - e).abs());
            if let Some(e) = err_cadm {
                max_err_cadm = Some(max_err_cadm.unwrap_or(0.0).max(e));
            }
            if let Some(e) = err_crdtm {
                max_err_crdtm = Some(max_err_crdtm.unwrap_or(0.0).max(e));
            }
            max_gap = max_gap.max((va - vr).abs() / (1.0 + va.abs()));
            rows.push(ReportRow {
                x,
                t,
                cadm: Some(va),
                crdtm: Some(vr),
                exact,
                err_cadm,
                err_crdtm,
                bound: Some(bound),
            });
        }
    }
    Ok(ErrorReport {
        rows,
        max_err_cadm,
        max_err_crdtm,
        max_method_gap: max_gap,
    })
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub const CSV_HEADER: &str = "x,t,cadm,crdtm,exact,err_cadm,err_crdtm,bound";

pub fn write_csv<W: io::Write + ?Sized>(w: &mut W, rows: &[ReportRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_float(r.x),
            fmt_float(r.t),
            fmt_opt(r.cadm),
            fmt_opt(r.crdtm),
            fmt_opt(r.exact),
            fmt_opt(r.err_cadm),
            fmt_opt(r.err_crdtm),
            fmt_opt(r.bound),
        )?;
    }
    Ok(())
}
