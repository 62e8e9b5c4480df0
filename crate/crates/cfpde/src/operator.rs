//! Operator trees for the split right-hand side of a conformable PDE.
//!
//! An [`OperatorExpr`] describes how `R`, `N` or a piece of either acts on
//! the unknown: sums, products, rational scalings, spatial conformable
//! derivatives and constant (known-function) leaves. Two evaluation
//! semantics coexist:
//!
//! * lambda semantics ([`eval_lambda`]): the unknown becomes a truncated
//!   lambda polynomial `u_0 + u_1 l + ... + u_m l^m`; coefficient `i` of the
//!   result is the i-th Adomian polynomial of the operator;
//! * spectrum semantics ([`spectrum_coeff`]): the unknown becomes a graded
//!   spectrum `{U_k}` and products turn into grade convolutions, the
//!   reduced-differential-transform reading of the same tree.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::expr::Expr;
use crate::rational::{is_valid_order, Rat};
use crate::series::{LambdaPoly, SeriesScalar};

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr {
    /// The unknown `u`.
    Unknown,
    /// `reps` applications of the spatial conformable derivative `T_beta`.
    SpaceDeriv {
        reps: u32,
        arg: Box<OperatorExpr>,
    },
    Add(Vec<OperatorExpr>),
    Mul(Vec<OperatorExpr>),
    Scale(Rat, Box<OperatorExpr>),
    /// A known spatial expression, independent of the unknown.
    Const(Expr),
}

impl OperatorExpr {
    pub fn unknown() -> OperatorExpr {
        OperatorExpr::Unknown
    }

    pub fn constant(e: Expr) -> OperatorExpr {
        OperatorExpr::Const(e)
    }

    /// `T_beta` applied `reps` times; nested derivatives merge.
    pub fn space_deriv(reps: u32, arg: OperatorExpr) -> OperatorExpr {
        assert!(reps >= 1, "derivative repetition count must be positive");
        match arg {
            OperatorExpr::SpaceDeriv { reps: inner, arg } => OperatorExpr::SpaceDeriv {
                reps: reps + inner,
                arg,
            },
            other => OperatorExpr::SpaceDeriv {
                reps,
                arg: Box::new(other),
            },
        }
    }

    pub fn add(children: Vec<OperatorExpr>) -> OperatorExpr {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                OperatorExpr::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => OperatorExpr::Const(Expr::zero()),
            1 => flat.into_iter().next().unwrap(),
            _ => OperatorExpr::Add(flat),
        }
    }

    pub fn mul(children: Vec<OperatorExpr>) -> OperatorExpr {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                OperatorExpr::Mul(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => OperatorExpr::Const(Expr::one()),
            1 => flat.into_iter().next().unwrap(),
            _ => OperatorExpr::Mul(flat),
        }
    }

    pub fn scale(q: Rat, child: OperatorExpr) -> OperatorExpr {
        if q.is_one() {
            return child;
        }
        if q.is_zero() {
            return OperatorExpr::Const(Expr::zero());
        }
        match child {
            OperatorExpr::Scale(inner, arg) => OperatorExpr::Scale(q * inner, arg),
            OperatorExpr::Const(e) => OperatorExpr::Const(e.scale(&q)),
            other => OperatorExpr::Scale(q, Box::new(other)),
        }
    }

    pub fn negate(child: OperatorExpr) -> OperatorExpr {
        OperatorExpr::scale(crate::rational::rat_int(-1), child)
    }

    pub fn contains_unknown(&self) -> bool {
        match self {
            OperatorExpr::Unknown => true,
            OperatorExpr::Const(_) => false,
            OperatorExpr::SpaceDeriv { arg, .. } => arg.contains_unknown(),
            OperatorExpr::Scale(_, arg) => arg.contains_unknown(),
            OperatorExpr::Add(cs) | OperatorExpr::Mul(cs) => {
                cs.iter().any(OperatorExpr::contains_unknown)
            }
        }
    }

    /// Number of unknown-bearing multiplicands, the operator's degree in `u`.
    /// `Add` reports the maximum over its branches.
    pub fn unknown_degree(&self) -> u32 {
        match self {
            OperatorExpr::Unknown => 1,
            OperatorExpr::Const(_) => 0,
            OperatorExpr::SpaceDeriv { arg, .. } => arg.unknown_degree(),
            OperatorExpr::Scale(_, arg) => arg.unknown_degree(),
            OperatorExpr::Add(cs) => cs
                .iter()
                .map(OperatorExpr::unknown_degree)
                .max()
                .unwrap_or(0),
            OperatorExpr::Mul(cs) => cs.iter().map(OperatorExpr::unknown_degree).sum(),
        }
    }
}

/// True iff the tree is linear in the unknown: no `Mul` with two or more
/// unknown-bearing children, and no `Mul` mixing a `Const` with the unknown
/// (rational scalings go through `Scale`).
pub fn check_linear(op: &OperatorExpr) -> bool {
    match op {
        OperatorExpr::Unknown | OperatorExpr::Const(_) => true,
        OperatorExpr::SpaceDeriv { arg, .. } => check_linear(arg),
        OperatorExpr::Scale(_, arg) => check_linear(arg),
        OperatorExpr::Add(cs) => cs.iter().all(check_linear),
        OperatorExpr::Mul(cs) => {
            let bearing = cs.iter().filter(|c| c.contains_unknown()).count();
            // A flattened Mul has >= 2 children, so any unknown inside it
            // sits next to another multiplicand.
            bearing == 0
        }
    }
}

fn validate_beta(beta: &Rat) -> Result<(), Error> {
    if is_valid_order(beta) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "spatial order must lie in (0,1], got {beta}"
        )))
    }
}

/// Substitutes `u` for the unknown and evaluates the tree in the scalar
/// ring `T`. Works for nonlinear trees too; [`apply_linear`] is the checked
/// linear-only wrapper.
pub fn apply_operator<T: SeriesScalar>(op: &OperatorExpr, u: &T, beta: &Rat) -> T {
    match op {
        OperatorExpr::Unknown => u.clone(),
        OperatorExpr::Const(e) => u.lift_expr(e),
        OperatorExpr::Scale(q, arg) => apply_operator(arg, u, beta).scale(q),
        OperatorExpr::SpaceDeriv { reps, arg } => {
            let mut v = apply_operator(arg, u, beta);
            for _ in 0..*reps {
                v = v.space_deriv(beta);
            }
            v
        }
        OperatorExpr::Add(cs) => {
            let mut acc = u.zero_like();
            for c in cs {
                acc = acc.add(&apply_operator(c, u, beta));
            }
            acc
        }
        OperatorExpr::Mul(cs) => {
            let mut acc = u.lift_expr(&Expr::one());
            for c in cs {
                acc = acc.mul(&apply_operator(c, u, beta));
            }
            acc
        }
    }
}

/// `R u` for a linear operator; rejects nonlinear trees.
pub fn apply_linear(op: &OperatorExpr, u: &Expr, beta: &Rat) -> Result<Expr, Error> {
    validate_beta(beta)?;
    if !check_linear(op) {
        return Err(Error::invalid(
            "operator is not linear in the unknown".to_string(),
        ));
    }
    Ok(apply_operator(op, u, beta))
}

/// Interprets the unknown as the lambda polynomial `parts[0] + parts[1] l +
/// ... + parts[m] l^m` and evaluates the tree in the quotient ring modulo
/// `l^(m+1)`. Coefficient `i` of the result is the i-th Adomian polynomial.
pub fn eval_lambda<T: SeriesScalar>(
    op: &OperatorExpr,
    parts: &[T],
    beta: &Rat,
) -> Result<LambdaPoly<T>, Error> {
    validate_beta(beta)?;
    if parts.is_empty() {
        return Err(Error::invalid(
            "lambda evaluation needs at least one part".to_string(),
        ));
    }
    Ok(eval_lambda_rec(op, parts, beta))
}

fn eval_lambda_rec<T: SeriesScalar>(op: &OperatorExpr, parts: &[T], beta: &Rat) -> LambdaPoly<T> {
    let order = parts.len() - 1;
    match op {
        OperatorExpr::Unknown => LambdaPoly::from_coeffs(parts.to_vec()),
        OperatorExpr::Const(e) => LambdaPoly::constant(parts[0].lift_expr(e), order),
        OperatorExpr::Scale(q, arg) => eval_lambda_rec(arg, parts, beta).scale(q),
        OperatorExpr::SpaceDeriv { reps, arg } => {
            let mut p = eval_lambda_rec(arg, parts, beta);
            for _ in 0..*reps {
                p = p.map_coeffs(|c| c.space_deriv(beta));
            }
            p
        }
        OperatorExpr::Add(cs) => {
            let mut acc = LambdaPoly::constant(parts[0].zero_like(), order);
            for c in cs {
                acc = acc.add(&eval_lambda_rec(c, parts, beta));
            }
            acc
        }
        OperatorExpr::Mul(cs) => {
            let mut acc = LambdaPoly::constant(parts[0].lift_expr(&Expr::one()), order);
            for c in cs {
                acc = acc.product(&eval_lambda_rec(c, parts, beta));
            }
            acc
        }
    }
}

/// Grades `0..=k` of the operator applied to the unknown whose spectrum is
/// `spectra`: the unknown maps to the spectrum itself, `Add`/`Scale` act
/// pointwise, `Mul` becomes grade convolution, a spatial derivative commutes
/// with the transform and acts on each grade, and a `Const` is concentrated
/// at grade 0.
pub fn spectrum_prefix(
    op: &OperatorExpr,
    spectra: &[Expr],
    k: usize,
    beta: &Rat,
) -> Result<Vec<Expr>, Error> {
    validate_beta(beta)?;
    if spectra.len() < k + 1 {
        return Err(Error::invalid(format!(
            "grade {k} needs {} spectrum entries, got {}",
            k + 1,
            spectra.len()
        )));
    }
    Ok(spectrum_rec(op, spectra, k, beta))
}

fn spectrum_rec(op: &OperatorExpr, spectra: &[Expr], k: usize, beta: &Rat) -> Vec<Expr> {
    match op {
        OperatorExpr::Unknown => spectra[..=k].to_vec(),
        OperatorExpr::Const(e) => {
            let mut v = vec![Expr::zero(); k + 1];
            v[0] = e.clone();
            v
        }
        OperatorExpr::Scale(q, arg) => spectrum_rec(arg, spectra, k, beta)
            .into_iter()
            .map(|c| c.scale(q))
            .collect(),
        OperatorExpr::SpaceDeriv { reps, arg } => spectrum_rec(arg, spectra, k, beta)
            .into_iter()
            .map(|c| {
                let mut v = c;
                for _ in 0..*reps {
                    v = SeriesScalar::space_deriv(&v, beta);
                }
                v
            })
            .collect(),
        OperatorExpr::Add(cs) => {
            let mut acc = vec![Expr::zero(); k + 1];
            for c in cs {
                for (slot, g) in acc.iter_mut().zip(spectrum_rec(c, spectra, k, beta)) {
                    *slot = slot.add(&g);
                }
            }
            acc
        }
        OperatorExpr::Mul(cs) => {
            let mut acc = vec![Expr::zero(); k + 1];
            acc[0] = Expr::one();
            for c in cs {
                let rhs = spectrum_rec(c, spectra, k, beta);
                let mut next = vec![Expr::zero(); k + 1];
                for (i, a) in acc.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in rhs.iter().take(k + 1 - i).enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        next[i + j] = next[i + j].add(&a.mul(b));
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// The grade-k reduced-transform coefficient of `op` applied to `spectra`.
pub fn spectrum_coeff(
    op: &OperatorExpr,
    spectra: &[Expr],
    k: usize,
    beta: &Rat,
) -> Result<Expr, Error> {
    Ok(spectrum_prefix(op, spectra, k, beta)?.swap_remove(k))
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_operator(self, f, false)
    }
}

fn fmt_scaled(mag: &Rat, arg: &OperatorExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if mag.is_one() {
        fmt_operator(arg, f, false)
    } else {
        write!(f, "{mag}*")?;
        fmt_operator(arg, f, true)
    }
}

fn fmt_deriv(reps: u32, arg: &OperatorExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match reps {
        1 => {
            write!(f, "Db(")?;
            fmt_operator(arg, f, false)?;
            write!(f, ")")
        }
        2 => {
            write!(f, "Db2(")?;
            fmt_operator(arg, f, false)?;
            write!(f, ")")
        }
        n => {
            write!(f, "Db(")?;
            fmt_deriv(n - 1, arg, f)?;
            write!(f, ")")
        }
    }
}

fn fmt_operator(op: &OperatorExpr, f: &mut fmt::Formatter<'_>, inside_mul: bool) -> fmt::Result {
    match op {
        OperatorExpr::Unknown => write!(f, "u"),
        OperatorExpr::Const(e) => {
            if e.num_terms() > 1 && inside_mul {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        OperatorExpr::SpaceDeriv { reps, arg } => fmt_deriv(*reps, arg, f),
        OperatorExpr::Scale(q, arg) => {
            if inside_mul {
                write!(f, "{q}*")?;
                return fmt_operator(arg, f, true);
            }
            if q.is_negative() {
                write!(f, "-")?;
            }
            fmt_scaled(&q.abs(), arg, f)
        }
        OperatorExpr::Add(cs) => {
            if inside_mul {
                write!(f, "(")?;
            }
            for (i, c) in cs.iter().enumerate() {
                match c {
                    OperatorExpr::Scale(q, arg) if i > 0 && q.is_negative() => {
                        write!(f, " - ")?;
                        fmt_scaled(&q.abs(), arg, f)?;
                    }
                    _ => {
                        if i > 0 {
                            write!(f, " + ")?;
                        }
                        fmt_operator(c, f, false)?;
                    }
                }
            }
            if inside_mul {
                write!(f, ")")?;
            }
            Ok(())
        }
        OperatorExpr::Mul(cs) => {
            // Runs of an identical child print as a power.
            let mut i = 0;
            let mut first = true;
            while i < cs.len() {
                let mut j = i + 1;
                while j < cs.len() && cs[j] == cs[i] {
                    j += 1;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                fmt_operator(&cs[i], f, true)?;
                if j - i > 1 {
                    write!(f, "^{}", j - i)?;
                }
                i = j;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn u() -> OperatorExpr {
        OperatorExpr::unknown()
    }

    fn exp_neg_xb(beta: &Rat) -> Expr {
        Expr::exp(&Expr::xpow(beta.clone()).scale(&beta.recip()).neg())
    }

    #[test]
    fn linearity_check() {
        // -u (the gas-dynamics R)
        assert!(check_linear(&OperatorExpr::negate(u())));
        // u * Db(u) is nonlinear
        let n = OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]);
        assert!(!check_linear(&n));
        // a constant-only tree is linear
        assert!(check_linear(&OperatorExpr::constant(Expr::x())));
        // a Const multiplied against the unknown is not accepted as linear
        let mixed = OperatorExpr::mul(vec![OperatorExpr::constant(Expr::x()), u()]);
        assert!(!check_linear(&mixed));
        // scaled sums of linear pieces stay linear
        let r = OperatorExpr::add(vec![
            OperatorExpr::scale(rat(-1, 2), OperatorExpr::space_deriv(2, u())),
            u(),
        ]);
        assert!(check_linear(&r));
    }

    #[test]
    fn apply_linear_substitutes() {
        // Db2 at beta = 1 is the classical second derivative.
        let op = OperatorExpr::space_deriv(2, u());
        let got = apply_linear(&op, &Expr::sin(&Expr::x()), &rat_int(1)).unwrap();
        assert_eq!(got, Expr::sin(&Expr::x()).neg());

        // -u is a plain sign flip
        let op = OperatorExpr::negate(u());
        let e = exp_neg_xb(&rat(1, 2));
        assert_eq!(apply_linear(&op, &e, &rat(1, 2)).unwrap(), e.neg());

        // T_(1/2) of 2*(x^(1/2) - 1/2) = 1: the advection initial slope
        let op = OperatorExpr::space_deriv(1, u());
        let ic = Expr::xpow(rat(1, 2))
            .sub(&Expr::from_rat(rat(1, 2)))
            .scale(&rat_int(2));
        assert_eq!(apply_linear(&op, &ic, &rat(1, 2)).unwrap(), Expr::one());
        // and without the rescaling the slope is 1/2
        let ic = Expr::xpow(rat(1, 2)).sub(&Expr::from_rat(rat(1, 2)));
        assert_eq!(
            apply_linear(&op, &ic, &rat(1, 2)).unwrap(),
            Expr::from_rat(rat(1, 2))
        );

        let nl = OperatorExpr::mul(vec![u(), u()]);
        assert!(apply_linear(&nl, &Expr::x(), &rat_int(1)).is_err());
    }

    #[test]
    fn lambda_single_part_of_gas_nonlinearity() {
        // N = u^2 + u*Db(u) at a single part u0: A_0 = u0^2 + u0 Db(u0)
        let n = OperatorExpr::add(vec![
            OperatorExpr::mul(vec![u(), u()]),
            OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]),
        ]);
        let beta = rat(1, 2);
        let u0 = exp_neg_xb(&beta);
        let got = eval_lambda(&n, std::slice::from_ref(&u0), &beta).unwrap();
        let du0 = u0.conf_deriv(&beta).unwrap();
        let want = u0.mul(&u0).add(&u0.mul(&du0));
        assert_eq!(got.coeffs(), &[want]);
    }

    #[test]
    fn lambda_identity_operator_returns_parts() {
        let parts = vec![Expr::one(), Expr::x(), Expr::xpow(rat_int(2))];
        let got = eval_lambda(&u(), &parts, &rat_int(1)).unwrap();
        assert_eq!(got.coeffs(), parts.as_slice());
    }

    #[test]
    fn lambda_square_matches_brute_force() {
        // u^2 with parts [1, x, x^2]: coefficient 2 is 2*x^2 + x*x = 3x^2.
        let n = OperatorExpr::mul(vec![u(), u()]);
        let parts = vec![Expr::one(), Expr::x(), Expr::xpow(rat_int(2))];
        let got = eval_lambda(&n, &parts, &rat_int(1)).unwrap();
        assert_eq!(got.coeffs()[2], Expr::xpow(rat_int(2)).scale(&rat_int(3)));
    }

    #[test]
    fn spectrum_of_unknown_is_projection() {
        let spectra = vec![Expr::one(), Expr::x(), Expr::xpow(rat_int(2))];
        for k in 0..spectra.len() {
            let got = spectrum_coeff(&u(), &spectra, k, &rat_int(1)).unwrap();
            assert_eq!(got, spectra[k]);
        }
        assert!(spectrum_coeff(&u(), &spectra, 3, &rat_int(1)).is_err());
    }

    #[test]
    fn spectrum_convolution_at_grade_one() {
        // u * Db(u) over [c, d] at grade 1: c*Db(d) + d*Db(c)
        let beta = rat(1, 2);
        let c = Expr::sin(&Expr::x());
        let d = Expr::xpow(rat(3, 2));
        let n = OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]);
        let got = spectrum_coeff(&n, &[c.clone(), d.clone()], 1, &beta).unwrap();
        let want = c
            .mul(&d.conf_deriv(&beta).unwrap())
            .add(&d.mul(&c.conf_deriv(&beta).unwrap()));
        assert_eq!(got, want);
    }

    #[test]
    fn gas_dynamics_spectrum_recurrence_shape() {
        // -(u*Db(u)) + u - u^2 at grade k reproduces the convolution sums of
        // the transformed gas-dynamics equation.
        let beta = rat(1, 2);
        let op = OperatorExpr::add(vec![
            OperatorExpr::negate(OperatorExpr::mul(vec![
                u(),
                OperatorExpr::space_deriv(1, u()),
            ])),
            u(),
            OperatorExpr::negate(OperatorExpr::mul(vec![u(), u()])),
        ]);
        let spectra = vec![
            exp_neg_xb(&beta),
            exp_neg_xb(&beta).scale(&rat_int(2)),
            Expr::xpow(rat(1, 2)),
        ];
        for k in 0..=2usize {
            let mut conv_du = Expr::zero();
            let mut conv_uu = Expr::zero();
            for r in 0..=k {
                let du = spectra[r].conf_deriv(&beta).unwrap();
                conv_du = conv_du.add(&spectra[k - r].mul(&du));
                conv_uu = conv_uu.add(&spectra[k - r].mul(&spectra[r]));
            }
            let want = spectra[k].sub(&conv_du).sub(&conv_uu);
            let got = spectrum_coeff(&op, &spectra, k, &beta).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn lambda_agrees_with_direct_application_for_linear_ops() {
        let beta = rat(3, 4);
        let r = OperatorExpr::add(vec![
            OperatorExpr::scale(rat(-1, 3), OperatorExpr::space_deriv(2, u())),
            OperatorExpr::scale(rat(2, 5), u()),
        ]);
        let parts = vec![
            Expr::sin(&Expr::xpow(rat(3, 4))),
            Expr::xpow(rat(3, 2)),
            Expr::exp(&Expr::x().neg()),
        ];
        let lp = eval_lambda(&r, &parts, &beta).unwrap();
        for (i, part) in parts.iter().enumerate() {
            assert_eq!(lp.coeffs()[i], apply_linear(&r, part, &beta).unwrap());
        }
    }

    #[test]
    fn display_round_shapes() {
        let r = OperatorExpr::negate(OperatorExpr::space_deriv(2, u()));
        assert_eq!(r.to_string(), "-Db2(u)");
        let n = OperatorExpr::add(vec![
            OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]),
            OperatorExpr::mul(vec![u(), u()]),
        ]);
        assert_eq!(n.to_string(), "u*Db(u) + u^2");
        let s = OperatorExpr::add(vec![
            OperatorExpr::scale(rat(-1, 2), u()),
            OperatorExpr::space_deriv(3, u()),
        ]);
        assert_eq!(s.to_string(), "-1/2*u + Db(Db2(u))");
    }
}
