//! Expression and operator parsing for the problem text format.
//!
//! One small grammar covers every value in a problem file:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('+' | '-') factor | power
//! power  := primary ('^' factor)?
//! primary:= integer | 'x' | 't' | 'a' | 'b' | 'u'
//!         | ('sin' | 'cos' | 'exp' | 'Da' | 'Db' | 'Db2') '(' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! `a` and `b` are the declared alpha/beta rationals, substituted before
//! canonicalization. `Db` is one application of the spatial conformable
//! derivative `T_beta`, `Db2` two; `Da` is `T_alpha` in `x` and therefore
//! requires `alpha = beta`. Decimal literals are rejected; rationals are
//! written as quotients of integers. Which atoms are admissible depends on
//! the slot: initial conditions take `x` only, sources also take `t` (as a
//! finite sum of powers compatible with the grading), operators also take
//! `u`, exact solutions take `x` and `t`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::expr::Expr;
use crate::operator::OperatorExpr;
use crate::rational::{rat_f64, rat_int, Rat};
use crate::series::TSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct Ast {
    kind: AstKind,
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum AstKind {
    Int(BigInt),
    Var(VarKind),
    Unknown,
    Call(FuncKind, Box<Ast>),
    Deriv(DerivKind, Box<Ast>),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarKind {
    X,
    T,
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum FuncKind {
    Sin,
    Cos,
    Exp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum DerivKind {
    Da,
    Db,
    Db2,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Where an expression string came from, for line/column diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct Locus {
    pub line: usize,
    pub col_offset: usize,
}

impl Locus {
    pub fn start() -> Locus {
        Locus {
            line: 1,
            col_offset: 0,
        }
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::parse_at(self.line, self.col_offset + pos, msg)
    }
}

fn lex(src: &str, locus: Locus) -> Result<Vec<(Tok, usize)>, Error> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                toks.push((Tok::Plus, pos));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, pos));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, pos));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, pos));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, pos));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, pos));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    return Err(locus.err(
                        i + 1,
                        "decimal literals are not supported; write an exact rational p/q",
                    ));
                }
                let lit: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(lit.parse().expect("digit run")), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => return Err(locus.err(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    i: usize,
    end: usize,
    locus: Locus,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), Error> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(self.locus.err(pos, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Ast {
                        kind: AstKind::Add(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Ast {
                        kind: AstKind::Sub(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, Error> {
        let mut lhs = self.factor()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Ast {
                        kind: AstKind::Mul(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Ast {
                        kind: AstKind::Div(Box::new(lhs), Box::new(rhs)),
                        pos,
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, Error> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                let inner = self.factor()?;
                Ok(Ast {
                    kind: AstKind::Neg(Box::new(inner)),
                    pos,
                })
            }
            Some(Tok::Plus) => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, Error> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            let pos = self.pos();
            self.bump();
            let exp = self.factor()?;
            return Ok(Ast {
                kind: AstKind::Pow(Box::new(base), Box::new(exp)),
                pos,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast, Error> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Ast {
                kind: AstKind::Int(n),
                pos,
            }),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                let kind = match name.as_str() {
                    "x" => {
                        return Ok(Ast {
                            kind: AstKind::Var(VarKind::X),
                            pos,
                        })
                    }
                    "t" => {
                        return Ok(Ast {
                            kind: AstKind::Var(VarKind::T),
                            pos,
                        })
                    }
                    "a" => {
                        return Ok(Ast {
                            kind: AstKind::Var(VarKind::Alpha),
                            pos,
                        })
                    }
                    "b" => {
                        return Ok(Ast {
                            kind: AstKind::Var(VarKind::Beta),
                            pos,
                        })
                    }
                    "u" => {
                        return Ok(Ast {
                            kind: AstKind::Unknown,
                            pos,
                        })
                    }
                    "sin" => Ok(FuncKind::Sin),
                    "cos" => Ok(FuncKind::Cos),
                    "exp" => Ok(FuncKind::Exp),
                    "Da" => Err(DerivKind::Da),
                    "Db" => Err(DerivKind::Db),
                    "Db2" => Err(DerivKind::Db2),
                    other => {
                        return Err(self.locus.err(pos, format!("unknown identifier `{other}`")))
                    }
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Ast {
                    kind: match kind {
                        Ok(f) => AstKind::Call(f, Box::new(arg)),
                        Err(d) => AstKind::Deriv(d, Box::new(arg)),
                    },
                    pos,
                })
            }
            _ => Err(self.locus.err(pos, "expected an expression")),
        }
    }
}

/// Parses a source string into a raw tree without resolving anything.
pub fn parse_ast(src: &str, locus: Locus) -> Result<Ast, Error> {
    let toks = lex(src, locus)?;
    if toks.is_empty() {
        return Err(locus.err(1, "empty expression"));
    }
    let end = src.chars().count() + 1;
    let mut p = Parser {
        toks: &toks,
        i: 0,
        end,
        locus,
    };
    let ast = p.expr()?;
    if p.i != toks.len() {
        return Err(locus.err(p.pos(), "unexpected trailing input"));
    }
    Ok(ast)
}

/// Lowering context: bound parameters plus which atoms this slot admits.
#[derive(Clone, Copy)]
struct Lower<'a> {
    alpha: &'a Rat,
    beta: &'a Rat,
    allow_t: bool,
    locus: Locus,
}

/// A finite polynomial in fractional powers of `t` with spatial coefficients;
/// the intermediate value of every non-operator lowering.
#[derive(Clone, Debug)]
struct TPoly {
    grades: BTreeMap<Rat, Expr>,
}

impl TPoly {
    fn constant(e: Expr) -> TPoly {
        let mut grades = BTreeMap::new();
        if !e.is_zero() {
            grades.insert(Rat::zero(), e);
        }
        TPoly { grades }
    }

    fn t_power(q: Rat) -> TPoly {
        let mut grades = BTreeMap::new();
        grades.insert(q, Expr::one());
        TPoly { grades }
    }

    fn prune(mut self) -> TPoly {
        self.grades.retain(|_, e| !e.is_zero());
        self
    }

    fn add(&self, other: &TPoly) -> TPoly {
        let mut grades = self.grades.clone();
        for (q, e) in &other.grades {
            let slot = grades.entry(q.clone()).or_insert_with(Expr::zero);
            *slot = slot.add(e);
        }
        TPoly { grades }.prune()
    }

    fn neg(&self) -> TPoly {
        TPoly {
            grades: self
                .grades
                .iter()
                .map(|(q, e)| (q.clone(), e.neg()))
                .collect(),
        }
    }

    fn mul(&self, other: &TPoly) -> TPoly {
        let mut grades: BTreeMap<Rat, Expr> = BTreeMap::new();
        for (qa, ea) in &self.grades {
            for (qb, eb) in &other.grades {
                let q = qa + qb;
                let slot = grades.entry(q).or_insert_with(Expr::zero);
                *slot = slot.add(&ea.mul(eb));
            }
        }
        TPoly { grades }.prune()
    }

    /// The value as a pure spatial expression, if it has no t-dependence.
    fn as_spatial(&self) -> Option<Expr> {
        match self.grades.len() {
            0 => Some(Expr::zero()),
            1 => {
                let (q, e) = self.grades.iter().next().unwrap();
                q.is_zero().then(|| e.clone())
            }
            _ => None,
        }
    }

    fn as_rational(&self) -> Option<Rat> {
        self.as_spatial().and_then(|e| e.as_constant())
    }

    fn pow(&self, q: &Rat, pos: usize, lw: &Lower<'_>) -> Result<TPoly, Error> {
        if self.grades.is_empty() {
            return if q.is_zero() {
                Ok(TPoly::constant(Expr::one()))
            } else if q.is_positive() {
                Ok(TPoly { grades: BTreeMap::new() })
            } else {
                Err(lw.locus.err(pos, "zero raised to a negative power"))
            };
        }
        if q.is_integer() && !q.is_negative() && self.grades.len() > 1 {
            let n = q
                .to_integer()
                .to_u32()
                .filter(|n| *n <= 256)
                .ok_or_else(|| lw.locus.err(pos, "exponent too large"))?;
            let mut acc = TPoly::constant(Expr::one());
            for _ in 0..n {
                acc = acc.mul(self);
            }
            return Ok(acc);
        }
        // Negative or fractional exponents need a single monomial-like grade.
        if self.grades.len() != 1 {
            return Err(lw.locus.err(
                pos,
                format!("cannot raise a sum to the non-natural power {q}"),
            ));
        }
        let (grade, e) = self.grades.iter().next().unwrap();
        let mut grades = BTreeMap::new();
        grades.insert(
            grade * q,
            e.pow(q).map_err(|err| lw.locus.err(pos, err.to_string()))?,
        );
        Ok(TPoly { grades }.prune())
    }

    fn div(&self, other: &TPoly, pos: usize, lw: &Lower<'_>) -> Result<TPoly, Error> {
        if other.grades.is_empty() {
            return Err(lw.locus.err(pos, "division by zero"));
        }
        let inv = other.pow(&rat_int(-1), pos, lw)?;
        Ok(self.mul(&inv))
    }
}

fn lower_tpoly(ast: &Ast, lw: &Lower<'_>) -> Result<TPoly, Error> {
    match &ast.kind {
        AstKind::Int(n) => Ok(TPoly::constant(Expr::from_rat(Rat::from_integer(
            n.clone(),
        )))),
        AstKind::Var(VarKind::X) => Ok(TPoly::constant(Expr::x())),
        AstKind::Var(VarKind::T) => {
            if lw.allow_t {
                Ok(TPoly::t_power(rat_int(1)))
            } else {
                Err(lw.locus.err(ast.pos, "`t` is not allowed here"))
            }
        }
        AstKind::Var(VarKind::Alpha) => Ok(TPoly::constant(Expr::from_rat(lw.alpha.clone()))),
        AstKind::Var(VarKind::Beta) => Ok(TPoly::constant(Expr::from_rat(lw.beta.clone()))),
        AstKind::Unknown => Err(lw.locus.err(ast.pos, "`u` is not allowed here")),
        AstKind::Call(func, arg) => {
            let inner = lower_tpoly(arg, lw)?;
            let Some(spatial) = inner.as_spatial() else {
                return Err(lw
                    .locus
                    .err(arg.pos, "function arguments must not depend on t"));
            };
            Ok(TPoly::constant(match func {
                FuncKind::Sin => Expr::sin(&spatial),
                FuncKind::Cos => Expr::cos(&spatial),
                FuncKind::Exp => Expr::exp(&spatial),
            }))
        }
        AstKind::Deriv(kind, arg) => {
            let inner = lower_tpoly(arg, lw)?;
            let Some(spatial) = inner.as_spatial() else {
                return Err(lw
                    .locus
                    .err(arg.pos, "derivative arguments must not depend on t"));
            };
            let e = apply_deriv_kind(&spatial, *kind, lw)
                .map_err(|err| lw.locus.err(ast.pos, err.to_string()))?;
            Ok(TPoly::constant(e))
        }
        AstKind::Neg(inner) => Ok(lower_tpoly(inner, lw)?.neg()),
        AstKind::Add(l, r) => Ok(lower_tpoly(l, lw)?.add(&lower_tpoly(r, lw)?)),
        AstKind::Sub(l, r) => Ok(lower_tpoly(l, lw)?.add(&lower_tpoly(r, lw)?.neg())),
        AstKind::Mul(l, r) => Ok(lower_tpoly(l, lw)?.mul(&lower_tpoly(r, lw)?)),
        AstKind::Div(l, r) => {
            let lhs = lower_tpoly(l, lw)?;
            let rhs = lower_tpoly(r, lw)?;
            lhs.div(&rhs, ast.pos, lw)
        }
        AstKind::Pow(base, exp) => {
            let b = lower_tpoly(base, lw)?;
            let q = lower_tpoly(exp, lw)?.as_rational().ok_or_else(|| {
                lw.locus
                    .err(exp.pos, "exponents must resolve to rational constants")
            })?;
            b.pow(&q, ast.pos, lw)
        }
    }
}

fn apply_deriv_kind(e: &Expr, kind: DerivKind, lw: &Lower<'_>) -> Result<Expr, Error> {
    match kind {
        DerivKind::Da => {
            if lw.alpha != lw.beta {
                return Err(Error::invalid(format!(
                    "Da denotes the spatial derivative of order alpha and needs alpha = beta \
                     (got alpha = {}, beta = {})",
                    lw.alpha, lw.beta
                )));
            }
            e.conf_deriv(lw.alpha)
        }
        DerivKind::Db => e.conf_deriv(lw.beta),
        DerivKind::Db2 => e.conf_deriv(lw.beta)?.conf_deriv(lw.beta),
    }
}

fn ast_contains_unknown(ast: &Ast) -> bool {
    match &ast.kind {
        AstKind::Unknown => true,
        AstKind::Int(_) | AstKind::Var(_) => false,
        AstKind::Call(_, a) | AstKind::Deriv(_, a) | AstKind::Neg(a) => ast_contains_unknown(a),
        AstKind::Add(l, r)
        | AstKind::Sub(l, r)
        | AstKind::Mul(l, r)
        | AstKind::Div(l, r)
        | AstKind::Pow(l, r) => ast_contains_unknown(l) || ast_contains_unknown(r),
    }
}

/// Lowers a t-free, unknown-free tree to a canonical spatial expression.
pub fn lower_to_expr(ast: &Ast, alpha: &Rat, beta: &Rat, locus: Locus) -> Result<Expr, Error> {
    let lw = Lower {
        alpha,
        beta,
        allow_t: false,
        locus,
    };
    let p = lower_tpoly(ast, &lw)?;
    p.as_spatial()
        .ok_or_else(|| locus.err(ast.pos, "unexpected t-dependence"))
}

/// Lowers a source tree to a graded series: every `t` power must be a
/// non-negative integer multiple of `alpha`.
pub fn lower_to_source(ast: &Ast, alpha: &Rat, beta: &Rat, locus: Locus) -> Result<TSeries, Error> {
    let lw = Lower {
        alpha,
        beta,
        allow_t: true,
        locus,
    };
    let p = lower_tpoly(ast, &lw)?;
    let mut coeffs: Vec<Expr> = Vec::new();
    for (q, e) in &p.grades {
        let ratio = q / alpha;
        if !ratio.is_integer() || ratio.is_negative() {
            return Err(locus.err(
                ast.pos,
                format!(
                    "source grade t^({q}) is not a non-negative integer multiple of alpha = {alpha}"
                ),
            ));
        }
        let k = ratio
            .to_integer()
            .to_usize()
            .ok_or_else(|| locus.err(ast.pos, "source grade too large"))?;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, Expr::zero());
        }
        coeffs[k] = e.clone();
    }
    TSeries::new(alpha.clone(), coeffs)
}

/// Lowers an operator tree (`u` admitted, `t` rejected). Rational scalars
/// are folded into `Scale` nodes so linear trees pass the linearity check.
pub fn lower_to_operator(
    ast: &Ast,
    alpha: &Rat,
    beta: &Rat,
    locus: Locus,
) -> Result<OperatorExpr, Error> {
    let lw = Lower {
        alpha,
        beta,
        allow_t: false,
        locus,
    };
    lower_op(ast, &lw)
}

fn lower_op(ast: &Ast, lw: &Lower<'_>) -> Result<OperatorExpr, Error> {
    if !ast_contains_unknown(ast) {
        let p = lower_tpoly(ast, lw)?;
        let e = p
            .as_spatial()
            .ok_or_else(|| lw.locus.err(ast.pos, "operators must not depend on t"))?;
        return Ok(OperatorExpr::constant(e));
    }
    match &ast.kind {
        AstKind::Unknown => Ok(OperatorExpr::unknown()),
        AstKind::Neg(inner) => Ok(OperatorExpr::negate(lower_op(inner, lw)?)),
        AstKind::Add(l, r) => Ok(OperatorExpr::add(vec![lower_op(l, lw)?, lower_op(r, lw)?])),
        AstKind::Sub(l, r) => Ok(OperatorExpr::add(vec![
            lower_op(l, lw)?,
            OperatorExpr::negate(lower_op(r, lw)?),
        ])),
        AstKind::Mul(l, r) => Ok(mul_op(lower_op(l, lw)?, lower_op(r, lw)?)),
        AstKind::Div(l, r) => {
            if ast_contains_unknown(r) {
                return Err(lw
                    .locus
                    .err(r.pos, "division by the unknown is not supported"));
            }
            let denom = lower_tpoly(r, lw)?
                .as_spatial()
                .ok_or_else(|| lw.locus.err(r.pos, "operators must not depend on t"))?;
            let inv = Expr::one()
                .div(&denom)
                .map_err(|e| lw.locus.err(ast.pos, e.to_string()))?;
            Ok(mul_op(OperatorExpr::constant(inv), lower_op(l, lw)?))
        }
        AstKind::Pow(base, exp) => {
            let q = lower_tpoly(exp, lw)?.as_rational().ok_or_else(|| {
                lw.locus
                    .err(exp.pos, "exponents must resolve to rational constants")
            })?;
            if !q.is_integer() || q.is_negative() {
                return Err(lw.locus.err(
                    ast.pos,
                    format!("the unknown can only be raised to natural powers, got {q}"),
                ));
            }
            let n = q
                .to_integer()
                .to_u32()
                .filter(|n| *n <= 64)
                .ok_or_else(|| lw.locus.err(ast.pos, "unknown power too large"))?;
            if n == 0 {
                return Ok(OperatorExpr::constant(Expr::one()));
            }
            let child = lower_op(base, lw)?;
            Ok(OperatorExpr::mul(vec![child; n as usize]))
        }
        AstKind::Deriv(kind, arg) => {
            let reps = match kind {
                DerivKind::Da => {
                    if lw.alpha != lw.beta {
                        return Err(lw.locus.err(
                            ast.pos,
                            format!(
                                "Da denotes the spatial derivative of order alpha and needs \
                                 alpha = beta (got alpha = {}, beta = {})",
                                lw.alpha, lw.beta
                            ),
                        ));
                    }
                    1
                }
                DerivKind::Db => 1,
                DerivKind::Db2 => 2,
            };
            Ok(OperatorExpr::space_deriv(reps, lower_op(arg, lw)?))
        }
        AstKind::Call(_, _) => Err(lw
            .locus
            .err(ast.pos, "sin/cos/exp of the unknown are not supported")),
        AstKind::Int(_) | AstKind::Var(_) => unreachable!("handled by the unknown-free path"),
    }
}

/// Multiplies two operator factors, folding rational scalars into `Scale`.
fn mul_op(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr {
    let mut scalar = rat_int(1);
    let mut children = Vec::new();
    for c in [a, b] {
        match c {
            OperatorExpr::Const(e) => match e.as_constant() {
                Some(q) => scalar *= q,
                None => children.push(OperatorExpr::Const(e)),
            },
            OperatorExpr::Scale(q, inner) => {
                scalar *= q;
                children.push(*inner);
            }
            other => children.push(other),
        }
    }
    OperatorExpr::scale(scalar, OperatorExpr::mul(children))
}

/// Rejects atoms that have no meaning in a closed-form exact solution.
pub fn validate_exact(ast: &Ast, locus: Locus) -> Result<(), Error> {
    match &ast.kind {
        AstKind::Unknown => Err(locus.err(ast.pos, "`u` is not allowed in an exact solution")),
        AstKind::Deriv(_, _) => Err(locus.err(
            ast.pos,
            "derivative operators are not allowed in an exact solution",
        )),
        AstKind::Int(_) | AstKind::Var(_) => Ok(()),
        AstKind::Call(_, a) | AstKind::Neg(a) => validate_exact(a, locus),
        AstKind::Add(l, r)
        | AstKind::Sub(l, r)
        | AstKind::Mul(l, r)
        | AstKind::Div(l, r)
        | AstKind::Pow(l, r) => {
            validate_exact(l, locus)?;
            validate_exact(r, locus)
        }
    }
}

/// Floating-point evaluation of a closed form at `(x, t)`.
pub fn eval_xt(ast: &Ast, x: f64, t: f64, alpha: &Rat, beta: &Rat) -> f64 {
    match &ast.kind {
        AstKind::Int(n) => n.to_f64().unwrap_or(f64::NAN),
        AstKind::Var(VarKind::X) => x,
        AstKind::Var(VarKind::T) => t,
        AstKind::Var(VarKind::Alpha) => rat_f64(alpha),
        AstKind::Var(VarKind::Beta) => rat_f64(beta),
        AstKind::Unknown => f64::NAN,
        AstKind::Call(func, a) => {
            let v = eval_xt(a, x, t, alpha, beta);
            match func {
                FuncKind::Sin => v.sin(),
                FuncKind::Cos => v.cos(),
                FuncKind::Exp => v.exp(),
            }
        }
        AstKind::Deriv(_, _) => f64::NAN,
        AstKind::Neg(a) => -eval_xt(a, x, t, alpha, beta),
        AstKind::Add(l, r) => eval_xt(l, x, t, alpha, beta) + eval_xt(r, x, t, alpha, beta),
        AstKind::Sub(l, r) => eval_xt(l, x, t, alpha, beta) - eval_xt(r, x, t, alpha, beta),
        AstKind::Mul(l, r) => eval_xt(l, x, t, alpha, beta) * eval_xt(r, x, t, alpha, beta),
        AstKind::Div(l, r) => eval_xt(l, x, t, alpha, beta) / eval_xt(r, x, t, alpha, beta),
        AstKind::Pow(l, r) => eval_xt(l, x, t, alpha, beta).powf(eval_xt(r, x, t, alpha, beta)),
    }
}

/// Parses and lowers a spatial expression with `a`/`b` bound to the given
/// rationals.
pub fn parse_expr(src: &str, alpha: &Rat, beta: &Rat) -> Result<Expr, Error> {
    let locus = Locus::start();
    let ast = parse_ast(src, locus)?;
    lower_to_expr(&ast, alpha, beta, locus)
}

/// Parses and lowers an operator string (`u` admitted); used for R, N and
/// the standalone Adomian generator.
pub fn parse_operator(src: &str, alpha: &Rat, beta: &Rat) -> Result<OperatorExpr, Error> {
    let locus = Locus::start();
    let ast = parse_ast(src, locus)?;
    lower_to_operator(&ast, alpha, beta, locus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::check_linear;
    use crate::rational::rat;

    fn half() -> Rat {
        rat(1, 2)
    }

    #[test]
    fn parses_initial_conditions() {
        // sin(x^b/b) at b = 1/2 is sin(2 x^(1/2))
        let got = parse_expr("sin(x^b/b)", &half(), &half()).unwrap();
        let want = Expr::sin(&Expr::xpow(half()).scale(&rat_int(2)));
        assert_eq!(got, want);

        // (x^a - a)/(2*a) at a = 1/2 is x^(1/2) - 1/2
        let got = parse_expr("(x^a - a)/(2*a)", &half(), &half()).unwrap();
        let want = Expr::xpow(half()).sub(&Expr::from_rat(half()));
        assert_eq!(got, want);
    }

    #[test]
    fn parses_operators() {
        let r = parse_operator("-Db2(u)", &half(), &half()).unwrap();
        assert_eq!(
            r,
            OperatorExpr::negate(OperatorExpr::space_deriv(2, OperatorExpr::unknown()))
        );
        assert!(check_linear(&r));

        let n = parse_operator("u*Db(u) + u^2", &half(), &half()).unwrap();
        let want = OperatorExpr::add(vec![
            OperatorExpr::mul(vec![
                OperatorExpr::unknown(),
                OperatorExpr::space_deriv(1, OperatorExpr::unknown()),
            ]),
            OperatorExpr::mul(vec![OperatorExpr::unknown(), OperatorExpr::unknown()]),
        ]);
        assert_eq!(n, want);
        assert!(!check_linear(&n));

        // scalars fold into Scale so linearity is visible
        let r = parse_operator("2*u - 1/3*Db(u)", &half(), &half()).unwrap();
        assert!(check_linear(&r));
    }

    #[test]
    fn da_requires_matching_orders() {
        assert!(parse_operator("Da(u)", &half(), &half()).is_ok());
        let err = parse_operator("Da(u)", &half(), &rat(3, 4)).unwrap_err();
        assert!(err.to_string().contains("alpha = beta"));
    }

    #[test]
    fn source_grading() {
        let alpha = half();
        // x * t^(1/2) sits at grade 1 for alpha = 1/2
        let ast = parse_ast("x*t^(1/2)", Locus::start()).unwrap();
        let s = lower_to_source(&ast, &alpha, &alpha, Locus::start()).unwrap();
        assert_eq!(s.coeff(0), Expr::zero());
        assert_eq!(s.coeff(1), Expr::x());

        // t^(1/3) is not on the grade lattice of alpha = 1/2
        let ast = parse_ast("t^(1/3)", Locus::start()).unwrap();
        assert!(lower_to_source(&ast, &alpha, &alpha, Locus::start()).is_err());

        // "0" is the empty source
        let ast = parse_ast("0", Locus::start()).unwrap();
        let s = lower_to_source(&ast, &alpha, &alpha, Locus::start()).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn diagnostics_carry_positions() {
        let err = parse_expr("sin(x", &half(), &half()).unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 6);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_expr("1.5*x", &half(), &half()).is_err());
        assert!(parse_expr("y + 1", &half(), &half()).is_err());
        assert!(parse_expr("x + t", &half(), &half()).is_err());
        assert!(parse_expr("u", &half(), &half()).is_err());
    }

    #[test]
    fn non_rational_exponents_are_rejected() {
        let err = parse_expr("x^x", &half(), &half()).unwrap_err();
        assert!(err.to_string().contains("rational"));
        // but x^(a+b) is fine: exponents may be built from parameters
        let got = parse_expr("x^(a+b)", &half(), &half()).unwrap();
        assert_eq!(got, Expr::x());
    }

    #[test]
    fn eval_xt_closed_forms() {
        let alpha = rat_int(1);
        let ast = parse_ast("(x^a - t^a - a)/(t^a + 2*a)", Locus::start()).unwrap();
        validate_exact(&ast, Locus::start()).unwrap();
        let got = eval_xt(&ast, 1.0, 0.0, &alpha, &alpha);
        assert!((got - 0.0).abs() < 1e-15);
        let got = eval_xt(&ast, 4.0, 1.0, &rat(1, 2), &rat(1, 2));
        // (2 - 1 - 1/2) / (1 + 1) = 1/4
        assert!((got - 0.25).abs() < 1e-15);
    }
}
