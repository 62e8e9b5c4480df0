//! Conformable Adomian decomposition.
//!
//! The solver iterates `u_0 = theta + L^-1 g`, `u_(n+1) = -L^-1(R u_n) -
//! L^-1(A_n)`, where `L^-1` is the weighted time integral
//! [`TSeries::inv_l`](crate::series::TSeries::inv_l) and `A_n` is the n-th
//! Adomian polynomial of the nonlinearity. Adomian polynomials are generated
//! by truncated lambda-ring arithmetic (the coefficient of `lambda^n` in
//! `N(sum lambda^i u_i)`), which is algebraically the same as the n-th
//! lambda-derivative formula without needing a differentiator.

use std::fmt;

use num_traits::Signed;

use crate::error::Error;
use crate::expr::Expr;
use crate::operator::{apply_operator, eval_lambda, OperatorExpr};
use crate::problem::ProblemSpec;
use crate::rational::Rat;
use crate::series::{SeriesScalar, TSeries};

/// Adomian polynomials `A_0..A_m` of `n_op` for the concrete decomposition
/// parts `u_0..u_m`.
pub fn adomian_polynomials(
    n_op: &OperatorExpr,
    parts: &[Expr],
    beta: &Rat,
) -> Result<Vec<Expr>, Error> {
    Ok(eval_lambda(n_op, parts, beta)?.into_coeffs())
}

/// Result of a decomposition solve: the raw iterates `u_0..u_m` (each a
/// graded series in its own right) and their sum truncated at grade `m`.
#[derive(Clone, Debug)]
pub struct CadmSolution {
    pub terms: Vec<TSeries>,
    pub series: TSeries,
}

/// Runs the decomposition recursion to order `m`.
///
/// For the supported problem class (zero source, spatial initial condition)
/// each iterate `u_n` occupies exactly grade `n`; that alignment is asserted
/// at every step. The summed series keeps grades `0..=m`.
pub fn cadm_solve(p: &ProblemSpec, m: usize) -> Result<CadmSolution, Error> {
    let alpha = p.alpha.clone();
    let theta = TSeries::spatial(alpha.clone(), p.ic.clone());
    let pure_problem = p.source.is_zero();
    let u0 = theta.add(&p.source.inv_l());

    let mut terms = vec![u0];
    for n in 0..m {
        let r_un = apply_operator(&p.linear, &terms[n], &p.beta);
        let a_n = match &p.nonlinear {
            Some(n_op) => eval_lambda(n_op, &terms, &p.beta)?
                .into_coeffs()
                .swap_remove(n),
            None => TSeries::zero(alpha.clone()),
        };
        let u_next = r_un.add(&a_n).inv_l().neg();
        if pure_problem {
            let aligned = u_next
                .coeffs()
                .iter()
                .enumerate()
                .all(|(k, c)| k == n + 1 || c.is_zero());
            assert!(aligned, "iterate {} leaked outside its grade", n + 1);
        }
        terms.push(u_next);
    }

    let mut series = TSeries::zero(alpha);
    for t in &terms {
        series = series.add(t);
    }
    Ok(CadmSolution {
        series: series.truncate(m),
        terms,
    })
}

/// A formal multivariate polynomial in the decomposition parts `u_i` and
/// their spatial derivatives `Db^r(u_i)`, with spatial [`Expr`]
/// coefficients. Instantiating the lambda ring with this carrier prints
/// Adomian polynomials symbolically instead of plugging concrete parts in.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalPoly {
    terms: Vec<FormalTerm>,
}

/// `coeff * prod_j Db^(derivs_j)(u_(part_j))`.
#[derive(Clone, Debug, PartialEq)]
struct FormalTerm {
    atoms: Vec<FormalAtom>,
    coeff: Expr,
}

/// Field order drives the derived `Ord`: underived parts sort before
/// derivatives, matching the conventional way Adomian lists are written.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct FormalAtom {
    derivs: u32,
    part: usize,
}

impl FormalPoly {
    pub fn zero() -> FormalPoly {
        FormalPoly { terms: Vec::new() }
    }

    /// The bare part symbol `u_i`.
    pub fn part(i: usize) -> FormalPoly {
        FormalPoly {
            terms: vec![FormalTerm {
                atoms: vec![FormalAtom { part: i, derivs: 0 }],
                coeff: Expr::one(),
            }],
        }
    }

    pub fn constant(e: Expr) -> FormalPoly {
        FormalPoly::from_terms(vec![FormalTerm {
            atoms: Vec::new(),
            coeff: e,
        }])
    }

    fn from_terms(mut terms: Vec<FormalTerm>) -> FormalPoly {
        terms.retain(|t| !t.coeff.is_zero());
        terms.sort_by(|a, b| a.atoms.cmp(&b.atoms));
        let mut merged: Vec<FormalTerm> = Vec::new();
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.atoms == t.atoms => last.coeff = last.coeff.add(&t.coeff),
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        FormalPoly { terms: merged }
    }
}

impl SeriesScalar for FormalPoly {
    fn zero_like(&self) -> Self {
        FormalPoly::zero()
    }

    fn lift_expr(&self, e: &Expr) -> Self {
        FormalPoly::constant(e.clone())
    }

    fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        FormalPoly::from_terms(terms)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut atoms = a.atoms.clone();
                atoms.extend(b.atoms.iter().cloned());
                atoms.sort();
                terms.push(FormalTerm {
                    atoms,
                    coeff: a.coeff.mul(&b.coeff),
                });
            }
        }
        FormalPoly::from_terms(terms)
    }

    fn scale(&self, q: &Rat) -> Self {
        FormalPoly::from_terms(
            self.terms
                .iter()
                .map(|t| FormalTerm {
                    atoms: t.atoms.clone(),
                    coeff: t.coeff.scale(q),
                })
                .collect(),
        )
    }

    fn space_deriv(&self, beta: &Rat) -> Self {
        // Product rule over the atoms plus the derivative of the spatial
        // coefficient; Db of an atom just bumps its repetition count.
        let mut terms = Vec::new();
        for t in &self.terms {
            let dcoeff = SeriesScalar::space_deriv(&t.coeff, beta);
            if !dcoeff.is_zero() {
                terms.push(FormalTerm {
                    atoms: t.atoms.clone(),
                    coeff: dcoeff,
                });
            }
            for i in 0..t.atoms.len() {
                let mut atoms = t.atoms.clone();
                atoms[i].derivs += 1;
                atoms.sort();
                terms.push(FormalTerm {
                    atoms,
                    coeff: t.coeff.clone(),
                });
            }
        }
        FormalPoly::from_terms(terms)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Adomian polynomials `A_0..A_m` with the parts kept symbolic, suitable for
/// printing (`A_1 = 2*u0*u1 + u0*Db(u1) + u1*Db(u0)` and so on).
pub fn adomian_polynomials_formal(
    n_op: &OperatorExpr,
    m: usize,
    beta: &Rat,
) -> Result<Vec<FormalPoly>, Error> {
    let parts: Vec<FormalPoly> = (0..=m).map(FormalPoly::part).collect();
    Ok(eval_lambda(n_op, &parts, beta)?.into_coeffs())
}

impl fmt::Display for FormalAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.derivs {
            0 => write!(f, "u{}", self.part),
            1 => write!(f, "Db(u{})", self.part),
            2 => write!(f, "Db2(u{})", self.part),
            n => {
                write!(f, "Db(")?;
                FormalAtom {
                    part: self.part,
                    derivs: n - 1,
                }
                .fmt(f)?;
                write!(f, ")")
            }
        }
    }
}

impl FormalTerm {
    fn fmt_magnitude(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeff = if self.fmt_negated() {
            self.coeff.neg()
        } else {
            self.coeff.clone()
        };
        let mut lead = true;
        if self.atoms.is_empty() || !coeff.is_one() {
            if coeff.num_terms() > 1 {
                write!(f, "({coeff})")?;
            } else {
                write!(f, "{coeff}")?;
            }
            lead = false;
        }
        let mut i = 0;
        while i < self.atoms.len() {
            let mut j = i + 1;
            while j < self.atoms.len() && self.atoms[j] == self.atoms[i] {
                j += 1;
            }
            if !lead {
                write!(f, "*")?;
            }
            lead = false;
            write!(f, "{}", self.atoms[i])?;
            if j - i > 1 {
                write!(f, "^{}", j - i)?;
            }
            i = j;
        }
        Ok(())
    }

    /// Single-term coefficients with a negative sign fold into the sum.
    fn fmt_negated(&self) -> bool {
        self.coeff.num_terms() == 1 && {
            match self.coeff.as_constant() {
                Some(q) => q.is_negative(),
                None => self.coeff.to_string().starts_with('-'),
            }
        }
    }
}

impl fmt::Display for FormalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                if t.fmt_negated() {
                    write!(f, "-")?;
                }
            } else if t.fmt_negated() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            t.fmt_magnitude(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn u() -> OperatorExpr {
        OperatorExpr::unknown()
    }

    fn gas_nonlinearity() -> OperatorExpr {
        OperatorExpr::add(vec![
            OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]),
            OperatorExpr::mul(vec![u(), u()]),
        ])
    }

    #[test]
    fn single_part_square() {
        let n = OperatorExpr::mul(vec![u(), u()]);
        let c = Expr::sin(&Expr::x());
        let got = adomian_polynomials(&n, std::slice::from_ref(&c), &rat_int(1)).unwrap();
        assert_eq!(got, vec![c.mul(&c)]);
    }

    #[test]
    fn gas_polynomials_with_concrete_parts() {
        // A_1 of u^2 + u*Db(u) must be 2 u0 u1 + u0 Db(u1) + u1 Db(u0).
        let beta = rat(1, 2);
        let parts = vec![Expr::sin(&Expr::x()), Expr::xpow(rat(3, 2))];
        let got = adomian_polynomials(&gas_nonlinearity(), &parts, &beta).unwrap();
        let d = |e: &Expr| e.conf_deriv(&beta).unwrap();
        let want1 = parts[0]
            .mul(&parts[1])
            .scale(&rat_int(2))
            .add(&parts[0].mul(&d(&parts[1])))
            .add(&parts[1].mul(&d(&parts[0])));
        assert_eq!(got[1], want1);
    }

    #[test]
    fn formal_polynomials_match_printed_lists() {
        // Eq-shape for N = u*Db(u) + u^2 up to A_1.
        let got = adomian_polynomials_formal(&gas_nonlinearity(), 1, &rat_int(1)).unwrap();
        assert_eq!(got[0].to_string(), "u0^2 + u0*Db(u0)");
        assert_eq!(got[1].to_string(), "2*u0*u1 + u0*Db(u1) + u1*Db(u0)");

        // Pure advection-style N = u*Db(u): A_n is the convolution of parts
        // against derivatives with no product-count weights.
        let n = OperatorExpr::mul(vec![u(), OperatorExpr::space_deriv(1, u())]);
        let got = adomian_polynomials_formal(&n, 3, &rat_int(1)).unwrap();
        assert_eq!(got[0].to_string(), "u0*Db(u0)");
        assert_eq!(got[1].to_string(), "u0*Db(u1) + u1*Db(u0)");
        assert_eq!(got[2].to_string(), "u0*Db(u2) + u1*Db(u1) + u2*Db(u0)");
        assert_eq!(
            got[3].to_string(),
            "u0*Db(u3) + u1*Db(u2) + u2*Db(u1) + u3*Db(u0)"
        );
    }

    #[test]
    fn formal_linear_operator_passes_parts_through() {
        let got = adomian_polynomials_formal(&u(), 2, &rat_int(1)).unwrap();
        assert_eq!(got[0], FormalPoly::part(0));
        assert_eq!(got[1], FormalPoly::part(1));
        assert_eq!(got[2], FormalPoly::part(2));
    }

    mod solve {
        use super::*;
        use crate::crdtm::{crdtm_solve, residual_coeffs};
        use crate::problem::builtin_with;
        use crate::rational::{factorial, rat_pow};

        #[test]
        fn diffusion_terms() {
            // u_n = (-1)^n sin(x^b/b) t^(n alpha) / (n! alpha^n)
            let alpha = rat(1, 2);
            let beta = rat(3, 4);
            let p = builtin_with("diffusion", Some(alpha.clone()), Some(beta.clone())).unwrap();
            let sol = cadm_solve(&p, 4).unwrap();
            let sin_xb = Expr::sin(&Expr::xpow(beta.clone()).scale(&beta.recip()));
            for (n, term) in sol.terms.iter().enumerate() {
                let sign = rat_int(if n % 2 == 0 { 1 } else { -1 });
                let c = sign / (factorial(n) * rat_pow(&alpha, n as i64));
                assert_eq!(term.coeff(n), sin_xb.scale(&c), "term {n}");
                assert_eq!(sol.series.coeff(n), sin_xb.scale(&c), "series grade {n}");
            }
        }

        #[test]
        fn gas_terms() {
            // u_n = exp(-x^b/b) t^(n alpha) / (n! alpha^n): the Adomian
            // polynomials cancel exactly against the series product terms.
            let alpha = rat(2, 3);
            let beta = rat(1, 2);
            let p = builtin_with("gas", Some(alpha.clone()), Some(beta.clone())).unwrap();
            let sol = cadm_solve(&p, 4).unwrap();
            let e = Expr::exp(&Expr::xpow(beta.clone()).scale(&beta.recip()).neg());
            for (n, term) in sol.terms.iter().enumerate() {
                let c = (factorial(n) * rat_pow(&alpha, n as i64)).recip();
                assert_eq!(term.coeff(n), e.scale(&c), "term {n}");
            }
        }

        #[test]
        fn advection_terms() {
            // u_0 = (x^a - a)/(2a); u_n = (-1)^n (x^a + a) t^(n a) / (2a)^(n+1)
            let alpha = rat(1, 2);
            let p = builtin_with("advection", Some(alpha.clone()), None).unwrap();
            let sol = cadm_solve(&p, 4).unwrap();
            let xa = Expr::xpow(alpha.clone());
            let a = Expr::from_rat(alpha.clone());
            let two_a = rat_int(2) * &alpha;
            assert_eq!(sol.terms[0].coeff(0), xa.sub(&a).scale(&two_a.recip()));
            for n in 1..=4usize {
                let sign = rat_int(if n % 2 == 0 { 1 } else { -1 });
                let c = sign * rat_pow(&two_a, -(n as i64 + 1));
                assert_eq!(sol.terms[n].coeff(n), xa.add(&a).scale(&c), "term {n}");
            }
        }

        #[test]
        fn methods_agree_and_residual_vanishes() {
            for name in ["diffusion", "gas", "advection"] {
                let p = builtin_with(name, Some(rat(2, 5)), None).unwrap();
                let sol = cadm_solve(&p, 4).unwrap();
                let spectra = crdtm_solve(&p, 4).unwrap();
                assert_eq!(sol.series, spectra, "{name} series disagree");
                for (k, r) in residual_coeffs(&p, &sol.series, 4)
                    .unwrap()
                    .iter()
                    .enumerate()
                {
                    assert!(r.is_zero(), "{name} residual at grade {k}: {r}");
                }
            }
        }

        #[test]
        fn order_zero_solve_is_the_initial_condition() {
            let p = builtin_with("gas", None, None).unwrap();
            let sol = cadm_solve(&p, 0).unwrap();
            assert_eq!(sol.terms.len(), 1);
            assert_eq!(sol.series.coeff(0), p.ic);
        }
    }
}
