//! Exact rationals and the small helpers the rest of the crate needs.
//!
//! [`Rational`] is `num_rational::BigRational`: always reduced, positive
//! denominator.

use alloc::format;
use alloc::string::{String, ToString};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `x - floor(x)`, in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// Distance to the nearest integer, `‖x‖`.
pub fn dist_to_int(x: &Rational) -> Rational {
    let f = frac(x);
    let g = Rational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"` with an explicit denominator, also for integers.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125` or `-3.5`.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".to_string()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, fraction) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(Error::Parse(format!("bad number {s:?}")));
    }
    let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(whole) || !digits_ok(fraction) {
        return Err(Error::Parse(format!("bad number {s:?}")));
    }
    let mut all = String::with_capacity(whole.len() + fraction.len());
    all.push_str(whole);
    all.push_str(fraction);
    let numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))?
    };
    let denom = num_traits::pow(BigInt::from(10u32), fraction.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

pub(crate) fn to_biguint(x: &BigInt) -> BigUint {
    debug_assert!(!x.is_negative());
    x.magnitude().clone()
}

pub(crate) fn signed(x: BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x)
}

pub(crate) fn lcm_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v))
}

/// Numerator of `x` rescaled to denominator `scale`; `scale` must be a
/// multiple of `x.denom()`.
pub(crate) fn scaled_numer(x: &Rational, scale: &BigInt) -> BigInt {
    x.numer() * (scale / x.denom())
}
