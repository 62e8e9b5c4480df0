//! Conformable reduced differential transform.
//!
//! The transform sends `u(x,t) = sum_k U_k(x) t^(k*alpha)` to its spectrum
//! `{U_k}`; the conformable time derivative becomes the shift
//! `U_k -> alpha*(k+1)*U_(k+1)`, so the PDE turns into the recurrence
//!
//! ```text
//! alpha*(k+1) U_(k+1) = g_k - (R u)_k - (N u)_k
//! ```
//!
//! assembled generically from the operator split via
//! [`spectrum_coeff`](crate::operator::spectrum_coeff).

use crate::error::Error;
use crate::expr::Expr;
use crate::operator::spectrum_coeff;
use crate::problem::ProblemSpec;
use crate::rational::rat_int;
use crate::series::TSeries;

/// Transform of the initial condition: `U_0 = u(x, 0)`.
///
/// Only first-order-in-time problems are supported, for which the general
/// integer-grade gate collapses to the single value `U_0 = f(x)`; the
/// problem model cannot express higher time orders, so nothing else reaches
/// this point.
pub fn transform_ic(p: &ProblemSpec) -> Expr {
    p.ic.clone()
}

/// Runs the spectrum recurrence up to grade `m` and returns the series
/// `[U_0, ..., U_m]`.
pub fn crdtm_solve(p: &ProblemSpec, m: usize) -> Result<TSeries, Error> {
    let mut spectra = vec![transform_ic(p)];
    for k in 0..m {
        let mut rhs = p.source.coeff(k);
        rhs = rhs.sub(&spectrum_coeff(&p.linear, &spectra, k, &p.beta)?);
        if let Some(n_op) = &p.nonlinear {
            rhs = rhs.sub(&spectrum_coeff(n_op, &spectra, k, &p.beta)?);
        }
        let divisor = &p.alpha * rat_int(k as i64 + 1);
        spectra.push(rhs.scale(&divisor.recip()));
    }
    TSeries::new(p.alpha.clone(), spectra)
}

/// Grade-wise residual of a candidate series in `L_alpha u + R u + N u - g`:
/// entry `k` is the grade-k coefficient, which must be identically zero for
/// `k < m` when the series solves the problem to order `m`.
pub fn residual_coeffs(p: &ProblemSpec, s: &TSeries, upto: usize) -> Result<Vec<Expr>, Error> {
    let spectra = (0..s.coeffs().len().max(upto + 2))
        .map(|k| s.coeff(k))
        .collect::<Vec<_>>();
    let mut out = Vec::with_capacity(upto);
    for k in 0..upto {
        let time_part = spectra[k + 1].scale(&(&p.alpha * rat_int(k as i64 + 1)));
        let mut res = time_part.add(&spectrum_coeff(&p.linear, &spectra, k, &p.beta)?);
        if let Some(n_op) = &p.nonlinear {
            res = res.add(&spectrum_coeff(n_op, &spectra, k, &p.beta)?);
        }
        out.push(res.sub(&p.source.coeff(k)));
    }
    Ok(out)
}
