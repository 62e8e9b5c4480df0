//! Canonical symbolic expressions over the spatial variable `x`.
//!
//! An [`Expr`] is a sum of terms; each term is an exact rational coefficient
//! times an ordered product of factors drawn from `x^q` (rational `q`),
//! `sin(arg)`, `cos(arg)` and `exp(arg)`, where every argument is itself an
//! `Expr`. Construction always normalizes, so structural equality of two
//! `Expr` values is a sound (though not complete) equality test:
//!
//! * like terms (identical factor multisets) are merged, zero terms dropped;
//! * `x^p * x^q` becomes `x^(p+q)`, `exp(a) * exp(b)` becomes `exp(a+b)`;
//! * `x^0` and `exp(0)` disappear; the empty sum is the zero expression;
//! * factors are kept in a fixed total order (powers of x, then exp, sin,
//!   cos, each ordered by argument), and terms are sorted by their factors.
//!
//! The class is closed under `d/dx` and under the conformable derivative
//! `T_a f = x^(1-a) f'` for rational orders `a` in (0, 1].

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::rational::{is_valid_order, rat_int, rat_pow, Rat};

/// One multiplicative factor of a term. Variant order is the canonical
/// factor order, so the derived `Ord` is the ordering the invariants ask for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// `x^q` with `q != 0`.
    XPow(Rat),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
}

impl Factor {
    /// d(factor)/dx as a full expression (chain rule included).
    fn deriv(&self) -> Expr {
        match self {
            Factor::XPow(q) => Expr::xpow(q - rat_int(1)).scale(q),
            Factor::Sin(a) => Expr::cos(a).mul(&a.diff()),
            Factor::Cos(a) => Expr::sin(a).mul(&a.diff()).neg(),
            Factor::Exp(a) => Expr::exp(a).mul(&a.diff()),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Factor::XPow(q) => x.powf(crate::rational::rat_f64(q)),
            Factor::Sin(a) => a.eval_unchecked(x).sin(),
            Factor::Cos(a) => a.eval_unchecked(x).cos(),
            Factor::Exp(a) => a.eval_unchecked(x).exp(),
        }
    }
}

/// `coeff * factors[0] * factors[1] * ...` with `coeff != 0`.
///
/// Field order matters: terms sort by factor list first, so the derived
/// `Ord` gives the canonical term order directly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Term {
    factors: Vec<Factor>,
    coeff: Rat,
}

/// Canonical symbolic expression; see the module docs for the invariants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

/// Outcome of an equivalence query between two canonical expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// Canonical forms are structurally identical (or differ by zero).
    Structural,
    /// Equal at 16 pseudo-random probe points; no structural proof.
    NumericProbable,
    Distinct,
}

/// Merges a factor multiset into canonical form: x-powers collapse into one
/// exponent, exp factors collapse into one argument, sin/cos repeats stay.
fn normalize_factors(factors: Vec<Factor>) -> Vec<Factor> {
    let mut x_exp = Rat::zero();
    let mut exp_arg: Option<Expr> = None;
    let mut rest: Vec<Factor> = Vec::new();
    for f in factors {
        match f {
            Factor::XPow(q) => x_exp += q,
            Factor::Exp(a) => {
                exp_arg = Some(match exp_arg {
                    Some(acc) => acc.add(&a),
                    None => a,
                })
            }
            other => rest.push(other),
        }
    }
    let mut out = Vec::with_capacity(rest.len() + 2);
    if !x_exp.is_zero() {
        out.push(Factor::XPow(x_exp));
    }
    if let Some(arg) = exp_arg {
        if !arg.is_zero() {
            out.push(Factor::Exp(arg));
        }
    }
    out.extend(rest);
    out.sort();
    out
}

impl Expr {
    fn from_terms(mut terms: Vec<Term>) -> Expr {
        terms.retain(|t| !t.coeff.is_zero());
        terms.sort_by(|a, b| a.factors.cmp(&b.factors));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.factors == t.factors => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        Expr { terms: merged }
    }

    pub fn zero() -> Expr {
        Expr { terms: Vec::new() }
    }

    pub fn one() -> Expr {
        Expr::from_rat(rat_int(1))
    }

    pub fn from_rat(q: Rat) -> Expr {
        Expr::from_terms(vec![Term {
            factors: Vec::new(),
            coeff: q,
        }])
    }

    pub fn from_int(n: i64) -> Expr {
        Expr::from_rat(rat_int(n))
    }

    /// The spatial variable `x`.
    pub fn x() -> Expr {
        Expr::xpow(rat_int(1))
    }

    /// `x^q`; `x^0` is `1`.
    pub fn xpow(q: Rat) -> Expr {
        if q.is_zero() {
            return Expr::one();
        }
        Expr::from_terms(vec![Term {
            factors: vec![Factor::XPow(q)],
            coeff: rat_int(1),
        }])
    }

    pub fn sin(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::zero();
        }
        Expr::from_terms(vec![Term {
            factors: vec![Factor::Sin(arg.clone())],
            coeff: rat_int(1),
        }])
    }

    pub fn cos(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Expr::from_terms(vec![Term {
            factors: vec![Factor::Cos(arg.clone())],
            coeff: rat_int(1),
        }])
    }

    pub fn exp(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Expr::from_terms(vec![Term {
            factors: vec![Factor::Exp(arg.clone())],
            coeff: rat_int(1),
        }])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].factors.is_empty() && self.terms[0].coeff.is_one()
    }

    /// `Some(q)` iff the expression is the constant `q` (zero included).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [t] if t.factors.is_empty() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr::from_terms(terms)
    }

    pub fn neg(&self) -> Expr {
        self.scale(&rat_int(-1))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &Rat) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    factors: t.factors.clone(),
                    coeff: &t.coeff * q,
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut fs = a.factors.clone();
                fs.extend(b.factors.iter().cloned());
                terms.push(Term {
                    factors: normalize_factors(fs),
                    coeff: &a.coeff * &b.coeff,
                });
            }
        }
        Expr::from_terms(terms)
    }

    /// Raises to a rational power. Integer powers work on any expression
    /// (negative ones on invertible single terms); non-integer powers need a
    /// single term with coefficient 1 built only from `x^p` and `exp` factors,
    /// since anything else would leave the rational-coefficient class.
    pub fn pow(&self, q: &Rat) -> Result<Expr, Error> {
        if q.is_zero() {
            return Ok(Expr::one());
        }
        if self.is_zero() {
            return if q.is_positive() {
                Ok(Expr::zero())
            } else {
                Err(Error::domain("zero raised to a negative power"))
            };
        }
        if q.is_integer() {
            let n = q
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::invalid("exponent too large"))?;
            if n < 0 {
                return self.invert()?.pow(&rat_int(-n));
            }
            if self.terms.len() == 1 {
                return Ok(Expr::from_terms(vec![term_int_pow(
                    &self.terms[0],
                    n as u64,
                )]));
            }
            // Multi-term bases expand combinatorially; refuse absurd powers
            // instead of hanging.
            if n > 256 {
                return Err(Error::invalid(format!(
                    "power {n} of a {}-term expression is too large",
                    self.terms.len()
                )));
            }
            let mut acc = Expr::one();
            for _ in 0..n {
                acc = acc.mul(self);
            }
            return Ok(acc);
        }
        // Non-integer exponent.
        let [t] = self.terms.as_slice() else {
            return Err(Error::invalid(format!(
                "cannot raise a {}-term expression to the non-integer power {q}",
                self.terms.len()
            )));
        };
        if !t.coeff.is_one() {
            return Err(Error::invalid(format!(
                "non-rational result: coefficient {} raised to power {q}",
                t.coeff
            )));
        }
        let mut fs = Vec::with_capacity(t.factors.len());
        for f in &t.factors {
            match f {
                Factor::XPow(p) => fs.push(Factor::XPow(p * q)),
                Factor::Exp(a) => fs.push(Factor::Exp(a.scale(q))),
                Factor::Sin(_) | Factor::Cos(_) => {
                    return Err(Error::invalid(format!(
                        "non-integer power {q} of a sin/cos factor is not representable"
                    )))
                }
            }
        }
        Ok(Expr::from_terms(vec![Term {
            factors: normalize_factors(fs),
            coeff: rat_int(1),
        }]))
    }

    /// Multiplicative inverse of a single invertible term
    /// (`c * x^p * exp(a)` shaped).
    fn invert(&self) -> Result<Expr, Error> {
        if self.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        let [t] = self.terms.as_slice() else {
            return Err(Error::invalid(format!(
                "cannot divide by a {}-term expression",
                self.terms.len()
            )));
        };
        let mut fs = Vec::with_capacity(t.factors.len());
        for f in &t.factors {
            match f {
                Factor::XPow(p) => fs.push(Factor::XPow(-p)),
                Factor::Exp(a) => fs.push(Factor::Exp(a.neg())),
                Factor::Sin(_) | Factor::Cos(_) => {
                    return Err(Error::invalid(
                        "cannot divide by a sin/cos factor".to_string(),
                    ))
                }
            }
        }
        Ok(Expr::from_terms(vec![Term {
            factors: normalize_factors(fs),
            coeff: t.coeff.recip(),
        }]))
    }

    /// Division; the divisor must be an invertible single term.
    pub fn div(&self, other: &Expr) -> Result<Expr, Error> {
        Ok(self.mul(&other.invert()?))
    }

    /// Classical derivative d/dx. The class is closed, so this never fails.
    pub fn diff(&self) -> Expr {
        let mut out = Expr::zero();
        for term in &self.terms {
            for i in 0..term.factors.len() {
                let mut rest = term.factors.clone();
                let f = rest.remove(i);
                let rest_expr = Expr::from_terms(vec![Term {
                    factors: normalize_factors(rest),
                    coeff: term.coeff.clone(),
                }]);
                out = out.add(&rest_expr.mul(&f.deriv()));
            }
        }
        out
    }

    /// Conformable derivative `T_order f = x^(1-order) * df/dx` for
    /// `order` in (0, 1].
    pub fn conf_deriv(&self, order: &Rat) -> Result<Expr, Error> {
        if !is_valid_order(order) {
            return Err(Error::invalid(format!(
                "conformable order must lie in (0,1], got {order}"
            )));
        }
        Ok(Expr::xpow(rat_int(1) - order).mul(&self.diff()))
    }

    /// Floating evaluation at `x > 0`; rational powers go through `powf`.
    pub fn eval_at(&self, x: f64) -> Result<f64, Error> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::domain(format!(
                "evaluation point must satisfy x > 0, got {x}"
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(crate::rational::rat_f64(&t.coeff), |acc, f| acc * f.eval(x))
            })
            .sum()
    }
}

fn term_int_pow(t: &Term, n: u64) -> Term {
    let mut fs = Vec::new();
    for f in &t.factors {
        match f {
            Factor::XPow(p) => fs.push(Factor::XPow(p * rat_int(n as i64))),
            Factor::Exp(a) => fs.push(Factor::Exp(a.scale(&rat_int(n as i64)))),
            other => {
                for _ in 0..n {
                    fs.push(other.clone());
                }
            }
        }
    }
    Term {
        factors: normalize_factors(fs),
        coeff: rat_pow(&t.coeff, n as i64),
    }
}

const PROBE_COUNT: usize = 16;
const PROBE_TOLERANCE: f64 = 1e-10;

/// Deterministic xorshift64* stream for the numeric probe points.
struct Probe(u64);

impl Probe {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Decides whether two canonical expressions denote the same function.
///
/// Structural identity (directly or after cancelling the difference) is a
/// proof; otherwise the expressions are probed at 16 pseudo-random points in
/// (0.1, 3) and agreement within `1e-10 * (1 + |value|)` is reported as
/// [`Equivalence::NumericProbable`]. The kernel has no trig rewrite rules, so
/// identities like sin^2 + cos^2 = 1 land in the numeric-probable bucket.
pub fn equivalence(a: &Expr, b: &Expr) -> Equivalence {
    if a == b || a.sub(b).is_zero() {
        return Equivalence::Structural;
    }
    let mut rng = Probe(0x9E3779B97F4A7C15);
    let mut probed = 0usize;
    for _ in 0..PROBE_COUNT {
        let x = 0.1 + 2.9 * rng.next_f64();
        let fa = a.eval_unchecked(x);
        let fb = b.eval_unchecked(x);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        probed += 1;
        if (fa - fb).abs() > PROBE_TOLERANCE * (1.0 + fa.abs().max(fb.abs())) {
            return Equivalence::Distinct;
        }
    }
    if probed == 0 {
        Equivalence::Distinct
    } else {
        Equivalence::NumericProbable
    }
}

pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    equivalence(a, b) != Equivalence::Distinct
}

fn fmt_exponent(q: &Rat) -> String {
    if q.is_integer() && !q.is_negative() {
        q.to_string()
    } else {
        format!("({q})")
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::XPow(q) if q.is_one() => write!(f, "x"),
            Factor::XPow(q) => write!(f, "x^{}", fmt_exponent(q)),
            Factor::Exp(a) => write!(f, "exp({a})"),
            Factor::Sin(a) => write!(f, "sin({a})"),
            Factor::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

impl Term {
    fn fmt_magnitude(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.coeff.abs();
        if self.factors.is_empty() {
            return write!(f, "{mag}");
        }
        if !mag.is_one() {
            write!(f, "{mag}*")?;
        }
        // Runs of an identical sin/cos factor print as a power.
        let mut i = 0;
        let mut first = true;
        while i < self.factors.len() {
            let mut j = i + 1;
            while j < self.factors.len() && self.factors[j] == self.factors[i] {
                j += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let run = j - i;
            if run == 1 {
                write!(f, "{}", self.factors[i])?;
            } else {
                write!(f, "{}^{run}", self.factors[i])?;
            }
            i = j;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                if t.coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else if t.coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            t.fmt_magnitude(f)?;
        }
        Ok(())
    }
}
