//! Problem model, `.fpde` text format and built-in examples.
//!
//! A problem file is a flat list of `key = "value"` lines with `#` comments:
//!
//! ```text
//! name  = "diffusion"
//! alpha = "1/2"            # conformable time order, rational in (0,1]
//! beta  = "1/2"            # conformable space order, rational in (0,1]
//! R     = "-Db2(u)"        # linear operator
//! N     = ""               # nonlinear operator (empty for linear problems)
//! g     = "0"              # source, a finite sum of t^(k*alpha) grades
//! ic    = "sin(x^b/b)"     # u(x, 0)
//! exact = "sin(x^b/b)*exp(-t^a/a)"   # optional closed form
//! ```
//!
//! The equation solved is `T_alpha u + R(u) + N(u) = g` with `u(x,0) = ic`.
//! The split must be explicit: R carries every linear term, N only terms of
//! degree two or more in the unknown.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::expr::Expr;
use crate::operator::{check_linear, OperatorExpr};
use crate::parse::{
    eval_xt, lower_to_expr, lower_to_operator, lower_to_source, parse_ast, validate_exact, Ast,
    Locus,
};
use crate::rational::{is_valid_order, parse_rat, Rat};
use crate::series::TSeries;

/// A closed-form reference solution `u(x, t)`, kept as source text plus its
/// parsed tree; evaluation is purely numeric.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    src: String,
    ast: Ast,
    alpha: Rat,
    beta: Rat,
}

impl ExactSolution {
    pub fn src(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, Error> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::domain(format!(
                "evaluation point must satisfy x > 0, got {x}"
            )));
        }
        if t < 0.0 {
            return Err(Error::domain(format!(
                "evaluation time must satisfy t >= 0, got {t}"
            )));
        }
        Ok(eval_xt(&self.ast, x, t, &self.alpha, &self.beta))
    }
}

/// One conformable fractional PDE in standard split form.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub alpha: Rat,
    pub beta: Rat,
    /// Initial condition `u(x, 0)`.
    pub ic: Expr,
    /// The linear operator R.
    pub linear: OperatorExpr,
    /// The nonlinear operator N; `None` for linear problems.
    pub nonlinear: Option<OperatorExpr>,
    /// The source g as a graded series.
    pub source: TSeries,
    pub exact: Option<ExactSolution>,
}

impl ProblemSpec {
    /// Evaluates the closed-form reference, when the problem declares one.
    pub fn exact_eval(&self, x: f64, t: f64) -> Result<f64, Error> {
        match &self.exact {
            Some(e) => e.eval(x, t),
            None => Err(Error::invalid(format!(
                "problem `{}` declares no exact solution",
                self.name
            ))),
        }
    }
}

/// Raw key/value view of a problem file; resolving binds alpha/beta and
/// lowers every expression. Keeping the two stages apart lets the CLI
/// re-resolve one file under `--alpha`/`--beta` overrides.
#[derive(Clone, Debug)]
pub struct ProblemSource {
    entries: BTreeMap<&'static str, (String, usize, usize)>,
}

const KEYS: [&str; 8] = ["name", "alpha", "beta", "R", "N", "g", "ic", "exact"];

/// Parses the `key = "value"` skeleton of a problem file.
pub fn parse_problem_source(text: &str) -> Result<ProblemSource, Error> {
    let mut entries: BTreeMap<&'static str, (String, usize, usize)> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| Error::parse_at(line_no, 1, "expected `key = \"value\"`"))?;
        let key = line[..eq].trim();
        let Some(key) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::parse_at(
                line_no,
                1,
                format!("unknown key `{key}` (expected one of {})", KEYS.join(", ")),
            ));
        };
        let rest = &line[eq + 1..];
        let open_rel = rest
            .find('"')
            .ok_or_else(|| Error::parse_at(line_no, eq + 2, "value must be double-quoted"))?;
        let open = eq + 1 + open_rel;
        let close_rel = rest[open_rel + 1..]
            .find('"')
            .ok_or_else(|| Error::parse_at(line_no, open + 2, "unterminated string value"))?;
        let close = open + 1 + close_rel;
        let value = &line[open + 1..close];
        let tail = line[close + 1..].trim();
        if !tail.is_empty() && !tail.starts_with('#') {
            return Err(Error::parse_at(
                line_no,
                close + 2,
                "unexpected input after the closing quote",
            ));
        }
        if entries
            .insert(key, (value.to_string(), line_no, open + 1))
            .is_some()
        {
            return Err(Error::parse_at(
                line_no,
                1,
                format!("duplicate key `{key}`"),
            ));
        }
    }
    Ok(ProblemSource { entries })
}

impl ProblemSource {
    fn get(&self, key: &str) -> Option<&(String, usize, usize)> {
        self.entries.get(key)
    }

    fn require(&self, key: &'static str) -> Result<&(String, usize, usize), Error> {
        self.get(key)
            .ok_or_else(|| Error::parse_at(1, 1, format!("missing required key `{key}`")))
    }

    fn order_value(&self, key: &'static str, overridden: Option<&Rat>) -> Result<Rat, Error> {
        if let Some(q) = overridden {
            if !is_valid_order(q) {
                return Err(Error::invalid(format!(
                    "{key} must be a rational in (0,1], got {q}"
                )));
            }
            return Ok(q.clone());
        }
        let (src, line, col) = self.require(key)?;
        let q = parse_rat(src).map_err(|e| Error::parse_at(*line, *col, e))?;
        if !is_valid_order(&q) {
            return Err(Error::parse_at(
                *line,
                *col,
                format!("{key} must lie in (0,1], got {q}"),
            ));
        }
        Ok(q)
    }

    /// Binds alpha/beta (file values unless overridden) and lowers every
    /// expression into a [`ProblemSpec`].
    pub fn resolve(
        &self,
        alpha_override: Option<&Rat>,
        beta_override: Option<&Rat>,
    ) -> Result<ProblemSpec, Error> {
        let alpha = self.order_value("alpha", alpha_override)?;
        let beta = self.order_value("beta", beta_override)?;

        let (name_src, ..) = self.require("name")?;
        let name = name_src.clone();

        let (ic_src, ic_line, ic_col) = self.require("ic")?;
        let ic_locus = Locus {
            line: *ic_line,
            col_offset: *ic_col,
        };
        let ic_ast = parse_ast(ic_src, ic_locus)?;
        let ic = lower_to_expr(&ic_ast, &alpha, &beta, ic_locus)?;

        let linear = match self.get("R") {
            Some((src, line, col)) if !src.trim().is_empty() => {
                let locus = Locus {
                    line: *line,
                    col_offset: *col,
                };
                let ast = parse_ast(src, locus)?;
                let op = lower_to_operator(&ast, &alpha, &beta, locus)?;
                if !check_linear(&op) {
                    return Err(Error::parse_at(
                        *line,
                        *col,
                        "R must be linear in the unknown; nonlinear terms belong in N",
                    ));
                }
                validate_r_has_no_constant_part(&op, &beta, *line, *col)?;
                op
            }
            _ => OperatorExpr::constant(Expr::zero()),
        };

        let nonlinear = match self.get("N") {
            Some((src, line, col)) if !src.trim().is_empty() => {
                let locus = Locus {
                    line: *line,
                    col_offset: *col,
                };
                let ast = parse_ast(src, locus)?;
                let op = lower_to_operator(&ast, &alpha, &beta, locus)?;
                validate_n_strictly_nonlinear(&op, &beta, *line, *col)?
            }
            _ => None,
        };

        let source = match self.get("g") {
            Some((src, line, col)) if !src.trim().is_empty() => {
                let locus = Locus {
                    line: *line,
                    col_offset: *col,
                };
                let ast = parse_ast(src, locus)?;
                lower_to_source(&ast, &alpha, &beta, locus)?
            }
            _ => TSeries::zero(alpha.clone()),
        };

        let exact = match self.get("exact") {
            Some((src, line, col)) if !src.trim().is_empty() => {
                let locus = Locus {
                    line: *line,
                    col_offset: *col,
                };
                let ast = parse_ast(src, locus)?;
                validate_exact(&ast, locus)?;
                Some(ExactSolution {
                    src: src.clone(),
                    ast,
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                })
            }
            _ => None,
        };

        Ok(ProblemSpec {
            name,
            alpha,
            beta,
            ic,
            linear,
            nonlinear,
            source,
            exact,
        })
    }
}

/// A linear operator sends 0 to 0, so R evaluated at the zero expression
/// must vanish; anything left over is a constant term that belongs in g.
fn validate_r_has_no_constant_part(
    op: &OperatorExpr,
    beta: &Rat,
    line: usize,
    col: usize,
) -> Result<(), Error> {
    let at_zero = crate::operator::apply_operator(op, &Expr::zero(), beta);
    if at_zero.is_zero() {
        Ok(())
    } else {
        Err(Error::parse_at(
            line,
            col,
            format!("R is affine: R(0) = {at_zero}; constant terms belong in g"),
        ))
    }
}

/// N must be strictly nonlinear. Substituting `lambda * u0` with a formal
/// symbol `u0` expands N into a polynomial in lambda whose degree is bounded
/// by the unknown-degree of the tree; the lambda^0 and lambda^1 coefficients
/// must vanish identically (formal symbols rule out accidental numeric
/// cancellation). If every coefficient vanishes, N is the zero operator and
/// collapses to `None`.
fn validate_n_strictly_nonlinear(
    op: &OperatorExpr,
    beta: &Rat,
    line: usize,
    col: usize,
) -> Result<Option<OperatorExpr>, Error> {
    use crate::cadm::FormalPoly;
    use crate::series::SeriesScalar;
    let degree = op.unknown_degree().max(1) as usize;
    let mut parts = vec![FormalPoly::zero(); degree + 1];
    parts[1] = FormalPoly::part(0);
    let probe = crate::operator::eval_lambda(op, &parts, beta)?;
    if !probe.coeffs()[0].is_zero() {
        return Err(Error::parse_at(
            line,
            col,
            "N has a constant part; it belongs in g",
        ));
    }
    if !probe.coeffs()[1].is_zero() {
        return Err(Error::parse_at(
            line,
            col,
            "N must be strictly nonlinear: linear terms belong in R",
        ));
    }
    Ok(probe
        .coeffs()
        .iter()
        .any(|c| !c.is_zero())
        .then(|| op.clone()))
}

/// Parses and resolves a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, Error> {
    parse_problem_source(text)?.resolve(None, None)
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = \"{}\"", self.name)?;
        writeln!(f, "alpha = \"{}\"", self.alpha)?;
        writeln!(f, "beta = \"{}\"", self.beta)?;
        writeln!(f, "R = \"{}\"", self.linear)?;
        match &self.nonlinear {
            Some(n) => writeln!(f, "N = \"{n}\"")?,
            None => writeln!(f, "N = \"\"")?,
        }
        writeln!(f, "g = \"{}\"", self.source)?;
        writeln!(f, "ic = \"{}\"", self.ic)?;
        match &self.exact {
            Some(e) => writeln!(f, "exact = \"{}\"", e.src())?,
            None => writeln!(f, "exact = \"\"")?,
        }
        Ok(())
    }
}

fn builtin_template(
    name: &str,
) -> Option<(
    &'static str,
    &'static str,
    &'static str,
    &'static str,
    &'static str,
)> {
    // (R, N, g, ic, exact)
    match name {
        "diffusion" => Some(("-Db2(u)", "", "0", "sin(x^b/b)", "sin(x^b/b)*exp(-t^a/a)")),
        "gas" => Some((
            "-u",
            "u*Db(u) + u^2",
            "0",
            "exp(-x^b/b)",
            "exp(t^a/a - x^b/b)",
        )),
        "advection" => Some((
            "Da(u)",
            "u*Da(u)",
            "0",
            "(x^a - a)/(2*a)",
            "(x^a - t^a - a)/(t^a + 2*a)",
        )),
        _ => None,
    }
}

/// The built-in example problems with the given orders. `diffusion` and
/// `gas` default to alpha = beta = 1/2; `advection` differentiates in space
/// at order alpha, so its beta is tied to alpha unless explicitly given.
///
/// The printed exact solution for `advection` sums the decomposition series
/// in closed form, `(x^a - t^a - a)/(t^a + 2a)` for `t^a < 2a`; its `t = 0`
/// slice is the initial condition and the `a = 1` case solves the classical
/// equation `u_t + (1 + u) u_x = 0`.
pub fn builtin_with(
    name: &str,
    alpha: Option<Rat>,
    beta: Option<Rat>,
) -> Result<ProblemSpec, Error> {
    let Some((r, n, g, ic, exact)) = builtin_template(name) else {
        return Err(Error::invalid(format!(
            "unknown built-in problem `{name}` (expected diffusion, gas or advection)"
        )));
    };
    let alpha = alpha.unwrap_or_else(|| crate::rational::rat(1, 2));
    let beta = match beta {
        Some(b) => b,
        None if name == "advection" => alpha.clone(),
        None => crate::rational::rat(1, 2),
    };
    let text = format!(
        "name = \"{name}\"\nalpha = \"{alpha}\"\nbeta = \"{beta}\"\nR = \"{r}\"\nN = \"{n}\"\ng = \"{g}\"\nic = \"{ic}\"\nexact = \"{exact}\"\n"
    );
    parse_problem(&text)
}

/// `builtin_with` at the default orders.
pub fn builtin(name: &str) -> Result<ProblemSpec, Error> {
    builtin_with(name, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn builtin_initial_conditions() {
        let gas = builtin_with("gas", None, Some(rat_int(1))).unwrap();
        let got = gas.ic.eval_at(1.0).unwrap();
        assert!((got - (-1.0f64).exp()).abs() < 1e-15);

        let diff = builtin("diffusion").unwrap();
        assert_eq!(
            diff.ic,
            Expr::sin(&Expr::xpow(rat(1, 2)).scale(&rat_int(2)))
        );
    }

    #[test]
    fn builtin_exact_values() {
        // classical reductions at alpha = beta = 1
        let one = rat_int(1);
        let diff = builtin_with("diffusion", Some(one.clone()), Some(one.clone())).unwrap();
        let got = diff.exact_eval(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!((got - 1.0).abs() < 1e-12);

        let gas = builtin_with("gas", Some(one.clone()), Some(one.clone())).unwrap();
        let got = gas.exact_eval(1.0, 1.0).unwrap();
        assert!((got - 1.0).abs() < 1e-12);

        let adv = builtin_with("advection", Some(one), None).unwrap();
        let got = adv.exact_eval(1.0, 0.0).unwrap();
        assert!(got.abs() < 1e-15);

        let adv = builtin_with("advection", Some(rat(1, 2)), None).unwrap();
        let got = adv.exact_eval(4.0, 1.0).unwrap();
        assert!((got - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_eval_requires_declaration() {
        let text = "name = \"bare\"\nalpha = \"1\"\nbeta = \"1\"\nic = \"x\"\n";
        let p = parse_problem(text).unwrap();
        assert!(p.exact_eval(1.0, 1.0).is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for name in ["diffusion", "gas", "advection"] {
            let p = builtin(name).unwrap();
            let reparsed = parse_problem(&p.to_string()).unwrap();
            assert_eq!(p, reparsed, "round trip failed for {name}");
        }
        // and for a problem with a nontrivial source
        let text = "name = \"forced\"\nalpha = \"1/2\"\nbeta = \"1/2\"\nR = \"-u\"\nN = \"\"\ng = \"x*t^(1/2) + 1\"\nic = \"x^2\"\n";
        let p = parse_problem(text).unwrap();
        let reparsed = parse_problem(&p.to_string()).unwrap();
        assert_eq!(p, reparsed);
    }

    #[test]
    fn rejects_out_of_range_orders() {
        let text = "name = \"bad\"\nalpha = \"3/2\"\nbeta = \"1\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("(0,1]"), "{err}");
    }

    #[test]
    fn rejects_nonlinear_r() {
        let text = "name = \"bad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"u*u\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("linear"), "{err}");
    }

    #[test]
    fn rejects_linear_terms_in_n() {
        let text =
            "name = \"bad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"0\"\nN = \"u*u + u\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("strictly nonlinear"), "{err}");
    }

    #[test]
    fn rejects_constant_terms_in_r() {
        let text = "name = \"bad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"u + x\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("belong in g"), "{err}");
        // the affine part may hide inside a derivative
        let text = "name = \"bad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"Db(u + x)\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("belong in g"), "{err}");
        // but a form whose constant parts cancel is honestly linear
        let text = "name = \"ok\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"Db(u + x) - 1\"\nic = \"x\"\n";
        assert!(parse_problem(text).is_ok());
    }

    #[test]
    fn nested_linear_terms_in_n_are_caught() {
        let text = "name = \"bad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"0\"\nN = \"Db(u^2 + u)\"\nic = \"x\"\n";
        let err = parse_problem(text).unwrap_err();
        assert!(err.to_string().contains("strictly nonlinear"), "{err}");
        // a vanishing nonlinearity collapses to the linear problem shape
        let text =
            "name = \"ok\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"-u\"\nN = \"u^2 - u^2\"\nic = \"x\"\n";
        let p = parse_problem(text).unwrap();
        assert!(p.nonlinear.is_none());
    }

    #[test]
    fn pure_integration_problem() {
        // R = "0", N = "": u = ic + L^-1 g
        let text = "name = \"quad\"\nalpha = \"1\"\nbeta = \"1\"\nR = \"0\"\nN = \"\"\ng = \"x\"\nic = \"0\"\n";
        let p = parse_problem(text).unwrap();
        let s = crate::cadm::cadm_solve(&p, 3).unwrap().series;
        // T_1 u = x  =>  u = x t
        assert_eq!(s.coeff(0), Expr::zero());
        assert_eq!(s.coeff(1), Expr::x());
        assert!(s.coeff(2).is_zero());
    }

    #[test]
    fn file_diagnostics() {
        let err = parse_problem("alpha 1/2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_problem("speed = \"fast\"\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        let err =
            parse_problem("name = \"x\"\nname = \"y\"\nalpha = \"1\"\nbeta = \"1\"\nic = \"x\"\n")
                .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        // expression errors point into the right line
        let err = parse_problem("name = \"p\"\nalpha = \"1\"\nbeta = \"1\"\nic = \"sin(q)\"\n")
            .unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 4);
                assert!(col > 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
