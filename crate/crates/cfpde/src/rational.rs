//! Exact rational scalars.
//!
//! All coefficients, exponents and fractional orders in this crate are
//! arbitrary-precision rationals; nothing numeric happens until a series is
//! evaluated on a grid. `Rat` is always stored in lowest terms with a
//! positive denominator (guaranteed by `num_rational::Ratio`).

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` into a rational in lowest terms.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    s.trim()
        .parse::<Rat>()
        .map_err(|e| format!("invalid rational `{s}`: {e}"))
}

/// Integer power with negative exponents allowed for nonzero bases.
pub fn rat_pow(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return rat_int(1);
    }
    let mag = exp.unsigned_abs() as u32;
    let p = Rat::new(base.numer().pow(mag), base.denom().pow(mag));
    if exp < 0 {
        assert!(!base.is_zero(), "zero base with negative exponent");
        p.recip()
    } else {
        p
    }
}

pub fn rat_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::from(1);
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

/// True iff `q` lies in the half-open interval (0, 1] of admissible
/// conformable orders.
pub fn is_valid_order(q: &Rat) -> bool {
    q.is_positive() && *q <= rat_int(1)
}
