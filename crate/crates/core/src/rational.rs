//! Exact rational helpers. Probabilities and polynomial coefficients are
//! arbitrary-precision rationals throughout.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `n` or `n/d` with decimal integers. Decimal fractions are rejected.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let valid = |t: &str| {
        let digits = t.strip_prefix('-').unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) || den.starts_with('-') {
        return None;
    }
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num.parse().ok()?, den))
}

/// `num/den` with the denominator always present.
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `num` for integers, `num/den` otherwise.
pub fn to_display_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_probability(r: &Rational) -> bool {
    r.is_positive() && *r <= Rational::one()
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_fraction_string(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid rational {s:?}")))
}
