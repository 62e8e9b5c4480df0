//! t-graded fractional power series and truncated lambda-polynomials.
//!
//! A [`TSeries`] is `sum_k coeffs[k] * t^(k*alpha)` with spatial [`Expr`]
//! coefficients and a fixed expansion origin `t0 = 0`. Time dependence is
//! represented only through the grade index `k`; mixed powers `t^q` with `q`
//! not a multiple of `alpha` are rejected upstream at problem load.
//!
//! A [`LambdaPoly`] lives in the quotient ring modulo `lambda^(m+1)`; it is
//! the ring in which nonlinearities are expanded to read off Adomian
//! polynomials. Its coefficients are [`Expr`] by default, but any
//! [`SeriesScalar`] works (the CADM iteration instantiates it with whole
//! `TSeries` values, the polynomial printer with formal products).

use std::fmt;

use num_traits::One;

use crate::error::Error;
use crate::expr::Expr;
use crate::rational::{is_valid_order, rat_int, Rat};

/// Scalar ring used by operator evaluation and lambda arithmetic.
///
/// `zero_like`/`lift_expr` take a prototype receiver so that carriers
/// with context (a `TSeries` and its `alpha`) can produce compatible values.
pub trait SeriesScalar: Clone {
    fn zero_like(&self) -> Self;
    /// Lifts a pure spatial expression into the ring of `self`
    /// (grade 0 for series, the constant term for polynomials).
    fn lift_expr(&self, e: &Expr) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, q: &Rat) -> Self;
    /// One application of the spatial conformable derivative `T_beta`.
    fn space_deriv(&self, beta: &Rat) -> Self;
    fn is_zero(&self) -> bool;
}

impl SeriesScalar for Expr {
    fn zero_like(&self) -> Self {
        Expr::zero()
    }

    fn lift_expr(&self, e: &Expr) -> Self {
        e.clone()
    }

    fn add(&self, other: &Self) -> Self {
        Expr::add(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        Expr::mul(self, other)
    }

    fn scale(&self, q: &Rat) -> Self {
        Expr::scale(self, q)
    }

    fn space_deriv(&self, beta: &Rat) -> Self {
        self.conf_deriv(beta)
            .expect("space derivative order validated at entry")
    }

    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

/// Fractional power series `sum_k U_k(x) t^(k*alpha)`, truncation order =
/// `coeffs.len() - 1`. Trailing zero coefficients are permitted; equality
/// ignores them.
#[derive(Clone, Debug)]
pub struct TSeries {
    alpha: Rat,
    coeffs: Vec<Expr>,
}

impl PartialEq for TSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.alpha != other.alpha {
            return false;
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl Eq for TSeries {}

impl TSeries {
    pub fn new(alpha: Rat, coeffs: Vec<Expr>) -> Result<TSeries, Error> {
        if !is_valid_order(&alpha) {
            return Err(Error::invalid(format!(
                "series grading order alpha must lie in (0,1], got {alpha}"
            )));
        }
        Ok(TSeries { alpha, coeffs })
    }

    pub fn zero(alpha: Rat) -> TSeries {
        TSeries {
            alpha,
            coeffs: Vec::new(),
        }
    }

    /// A pure spatial expression sitting at grade 0.
    pub fn spatial(alpha: Rat, e: Expr) -> TSeries {
        TSeries {
            alpha,
            coeffs: vec![e],
        }
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// Grade-k coefficient, zero beyond the stored truncation.
    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// Index of the single nonzero grade, if there is exactly one.
    pub fn single_grade(&self) -> Option<usize> {
        let mut found = None;
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }

    pub fn add(&self, other: &TSeries) -> TSeries {
        assert_eq!(self.alpha, other.alpha, "mismatched series grading order");
        let n = self.coeffs.len().max(other.coeffs.len());
        TSeries {
            alpha: self.alpha.clone(),
            coeffs: (0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect(),
        }
    }

    pub fn neg(&self) -> TSeries {
        self.scale(&rat_int(-1))
    }

    pub fn sub(&self, other: &TSeries) -> TSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &Rat) -> TSeries {
        TSeries {
            alpha: self.alpha.clone(),
            coeffs: self.coeffs.iter().map(|c| c.scale(q)).collect(),
        }
    }

    pub fn scale_expr(&self, e: &Expr) -> TSeries {
        TSeries {
            alpha: self.alpha.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(e)).collect(),
        }
    }

    /// Drops grades above `m` (keeps `m + 1` coefficients).
    pub fn truncate(&self, m: usize) -> TSeries {
        TSeries {
            alpha: self.alpha.clone(),
            coeffs: self.coeffs.iter().take(m + 1).cloned().collect(),
        }
    }

    /// The weighted time integral `int_0^t xi^(alpha-1) (.) dxi` in closed
    /// form on grades: coefficient `k` moves to grade `k+1` divided by
    /// `(k+1) * alpha`, and grade 0 of the result is 0.
    pub fn inv_l(&self) -> TSeries {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Expr::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            let divisor = &self.alpha * rat_int(k as i64 + 1);
            coeffs.push(c.scale(&divisor.recip()));
        }
        TSeries {
            alpha: self.alpha.clone(),
            coeffs,
        }
    }

    /// Grade-level conformable time derivative: coefficient `k` of the
    /// result is `alpha * (k+1) * coeffs[k+1]`. Exact inverse of [`inv_l`]
    /// on grades >= 0.
    ///
    /// [`inv_l`]: TSeries::inv_l
    pub fn conf_time_deriv(&self) -> TSeries {
        let coeffs = (1..self.coeffs.len())
            .map(|k| self.coeffs[k].scale(&(&self.alpha * rat_int(k as i64))))
            .collect();
        TSeries {
            alpha: self.alpha.clone(),
            coeffs,
        }
    }

    /// Grade-wise convolution (Cauchy product). The inputs are exact finite
    /// series, so the full combined order is kept; truncate explicitly when
    /// a shorter view is wanted.
    pub fn cauchy_product(&self, other: &TSeries) -> Result<TSeries, Error> {
        if self.alpha != other.alpha {
            return Err(Error::invalid(format!(
                "cannot multiply series with different grading orders {} and {}",
                self.alpha, other.alpha
            )));
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(TSeries::zero(self.alpha.clone()));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![Expr::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Ok(TSeries {
            alpha: self.alpha.clone(),
            coeffs,
        })
    }

    /// `sum_k coeffs[k](x) * t^(k*alpha)` at a grid point.
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
        let alpha = crate::rational::rat_f64(&self.alpha);
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let tk = if k == 0 {
                1.0
            } else {
                t.powf(alpha * k as f64)
            };
            acc += c.eval_at(x)? * tk;
        }
        Ok(acc)
    }
}

impl SeriesScalar for TSeries {
    fn zero_like(&self) -> Self {
        TSeries::zero(self.alpha.clone())
    }

    fn lift_expr(&self, e: &Expr) -> Self {
        TSeries::spatial(self.alpha.clone(), e.clone())
    }

    fn add(&self, other: &Self) -> Self {
        TSeries::add(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        self.cauchy_product(other)
            .expect("series grading orders agree within one problem")
    }

    fn scale(&self, q: &Rat) -> Self {
        TSeries::scale(self, q)
    }

    fn space_deriv(&self, beta: &Rat) -> Self {
        TSeries {
            alpha: self.alpha.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| SeriesScalar::space_deriv(c, beta))
                .collect(),
        }
    }

    fn is_zero(&self) -> bool {
        TSeries::is_zero(self)
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces: Vec<String> = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k == 0 {
                pieces.push(c.to_string());
                continue;
            }
            let grade = &self.alpha * rat_int(k as i64);
            let tpow = if grade.is_one() {
                "t".to_string()
            } else if grade.is_integer() {
                format!("t^{grade}")
            } else {
                format!("t^({grade})")
            };
            if c.is_one() {
                pieces.push(tpow);
            } else if c.num_terms() > 1 {
                pieces.push(format!("({c})*{tpow}"));
            } else {
                pieces.push(format!("{c}*{tpow}"));
            }
        }
        if pieces.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", pieces[0])?;
        for p in &pieces[1..] {
            match p.strip_prefix('-') {
                Some(body) => write!(f, " - {body}")?,
                None => write!(f, " + {p}")?,
            }
        }
        Ok(())
    }
}

/// Truncated polynomial in the bookkeeping parameter lambda; all arithmetic
/// is modulo `lambda^(order+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaPoly<T = Expr> {
    coeffs: Vec<T>,
}

impl<T: SeriesScalar> LambdaPoly<T> {
    /// Wraps coefficients `[c_0, ..., c_m]` for `c_0 + c_1 l + ... + c_m l^m`.
    pub fn from_coeffs(coeffs: Vec<T>) -> LambdaPoly<T> {
        assert!(!coeffs.is_empty(), "lambda polynomial needs order >= 0");
        LambdaPoly { coeffs }
    }

    pub fn constant(value: T, order: usize) -> LambdaPoly<T> {
        let zero = value.zero_like();
        let mut coeffs = vec![value];
        coeffs.resize(order + 1, zero);
        LambdaPoly { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn add(&self, other: &LambdaPoly<T>) -> LambdaPoly<T> {
        assert_eq!(self.order(), other.order(), "mismatched truncation orders");
        LambdaPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, q: &Rat) -> LambdaPoly<T> {
        LambdaPoly {
            coeffs: self.coeffs.iter().map(|c| c.scale(q)).collect(),
        }
    }

    /// Truncated convolution: the product modulo `lambda^(order+1)`.
    pub fn product(&self, other: &LambdaPoly<T>) -> LambdaPoly<T> {
        assert_eq!(self.order(), other.order(), "mismatched truncation orders");
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = vec![zero; self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > self.order() {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        LambdaPoly { coeffs }
    }

    pub fn map_coeffs(&self, f: impl Fn(&T) -> T) -> LambdaPoly<T> {
        LambdaPoly {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// Free-function form of [`LambdaPoly::product`].
pub fn lambda_product<T: SeriesScalar>(a: &LambdaPoly<T>, b: &LambdaPoly<T>) -> LambdaPoly<T> {
    a.product(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn half() -> Rat {
        rat(1, 2)
    }

    fn sin_xb(beta: &Rat) -> Expr {
        Expr::sin(&Expr::xpow(beta.clone()).scale(&beta.recip()))
    }

    #[test]
    fn alpha_must_be_admissible() {
        assert!(TSeries::new(rat(3, 2), vec![]).is_err());
        assert!(TSeries::new(rat(1, 2), vec![Expr::one()]).is_ok());
    }

    #[test]
    fn inv_l_moves_grades_and_divides() {
        let alpha = half();
        // [sin(x^b/b)] -> [0, sin(x^b/b)/alpha]
        let s = TSeries::spatial(alpha.clone(), sin_xb(&half()));
        let got = s.inv_l();
        assert_eq!(got.coeff(0), Expr::zero());
        assert_eq!(got.coeff(1), sin_xb(&half()).scale(&alpha.recip()));

        // [0, 1/alpha] -> [0, 0, 1/(2 alpha^2)]
        let s = TSeries::new(
            alpha.clone(),
            vec![Expr::zero(), Expr::from_rat(alpha.recip())],
        )
        .unwrap();
        let got = s.inv_l();
        assert_eq!(got.coeff(1), Expr::zero());
        let want = (&alpha * &alpha * rat_int(2)).recip();
        assert_eq!(got.coeff(2), Expr::from_rat(want));

        // zero in, zero out
        assert!(TSeries::zero(alpha).inv_l().is_zero());
    }

    #[test]
    fn time_deriv_inverts_inv_l() {
        let alpha = rat(3, 4);
        let s = TSeries::new(
            alpha,
            vec![
                sin_xb(&half()),
                Expr::xpow(rat(5, 2)).scale(&rat(-7, 3)),
                Expr::exp(&Expr::x().neg()),
            ],
        )
        .unwrap();
        assert_eq!(s.inv_l().conf_time_deriv(), s);
    }

    #[test]
    fn cauchy_small_cases() {
        let alpha = half();
        // [1, x] * [2, 0] = [2, 2x] (up to trailing zeros)
        let a = TSeries::new(alpha.clone(), vec![Expr::one(), Expr::x()]).unwrap();
        let b = TSeries::new(alpha.clone(), vec![Expr::from_int(2), Expr::zero()]).unwrap();
        let got = a.cauchy_product(&b).unwrap();
        let want = TSeries::new(
            alpha.clone(),
            vec![Expr::from_int(2), Expr::x().scale(&rat_int(2))],
        )
        .unwrap();
        assert_eq!(got, want);

        // identity element
        let unit = TSeries::spatial(alpha.clone(), Expr::one());
        assert_eq!(a.cauchy_product(&unit).unwrap(), a);

        // the square shape feeding the u^2 convolution of the gas problem:
        // grade-1 coefficient of [e, e/alpha]^2 is 2 e^2 / alpha
        let e = Expr::exp(&Expr::xpow(half()).scale(&rat_int(-2)));
        let s = TSeries::new(alpha.clone(), vec![e.clone(), e.scale(&alpha.recip())]).unwrap();
        let got = s.cauchy_product(&s).unwrap();
        let want1 = e.mul(&e).scale(&(alpha.recip() * rat_int(2)));
        assert_eq!(got.coeff(1), want1);
    }

    #[test]
    fn cauchy_rejects_mismatched_alpha() {
        let a = TSeries::spatial(rat(1, 2), Expr::one());
        let b = TSeries::spatial(rat(1, 3), Expr::one());
        assert!(a.cauchy_product(&b).is_err());
    }

    #[test]
    fn series_eval_points() {
        // single spatial grade is t-independent
        let s = TSeries::spatial(rat_int(1), Expr::sin(&Expr::x()));
        let got = s.eval(1.0, 5.0).unwrap();
        assert!((got - 1.0f64.sin()).abs() < 1e-15);

        // empty series evaluates to zero
        assert_eq!(TSeries::zero(half()).eval(2.0, 0.3).unwrap(), 0.0);

        // domain checks
        assert!(s.eval(0.0, 1.0).is_err());
        assert!(s.eval(1.0, -0.1).is_err());
    }

    #[test]
    fn eval_partial_sum_of_exponential_series() {
        // coeffs sin(1)*(-1)^n/n! at x=1, alpha=1: partial sums approach
        // sin(1) e^(-t); next-term bound at t=1/2, 8 coefficients:
        // sin(1) * 0.5^8 / 8!.
        let mut coeffs = Vec::new();
        for n in 0..8i64 {
            let c =
                rat_int(if n % 2 == 0 { 1 } else { -1 }) / crate::rational::factorial(n as usize);
            coeffs.push(Expr::sin(&Expr::x()).scale(&c));
        }
        let s = TSeries::new(rat_int(1), coeffs).unwrap();
        let got = s.eval(1.0, 0.5).unwrap();
        let want = 1.0f64.sin() * (-0.5f64).exp();
        let bound = 1.0f64.sin() * 0.5f64.powi(8) / 40320.0;
        assert!((got - want).abs() <= bound * 1.0000001);
    }

    #[test]
    fn lambda_ring_products() {
        // (1 + lambda x)^2 at order 2 -> [1, 2x, x^2]
        let p = LambdaPoly::from_coeffs(vec![Expr::one(), Expr::x(), Expr::zero()]);
        let got = p.product(&p);
        assert_eq!(
            got.coeffs(),
            &[
                Expr::one(),
                Expr::x().scale(&rat_int(2)),
                Expr::xpow(rat_int(2))
            ]
        );

        // (1 + lambda x + lambda^2 x^2)^2 at order 2: coefficient of
        // lambda^2 is 3x^2 (2*x^2 from the cross term + x*x)
        let p = LambdaPoly::from_coeffs(vec![Expr::one(), Expr::x(), Expr::xpow(rat_int(2))]);
        let got = p.product(&p);
        assert_eq!(got.coeffs()[2], Expr::xpow(rat_int(2)).scale(&rat_int(3)));

        // multiplication by zero annihilates
        let z = LambdaPoly::constant(Expr::zero(), 2);
        assert!(p.product(&z).coeffs().iter().all(Expr::is_zero));
    }

    #[test]
    fn display_shapes() {
        let alpha = half();
        let s = TSeries::new(
            alpha,
            vec![
                Expr::one(),
                Expr::x().scale(&rat_int(-2)),
                Expr::zero(),
                Expr::from_rat(rat(1, 3)),
            ],
        )
        .unwrap();
        assert_eq!(s.to_string(), "1 - 2*x*t^(1/2) + 1/3*t^(3/2)");
        assert_eq!(TSeries::zero(rat(1, 2)).to_string(), "0");
    }
}
