//! Parsing and formatting of exact rationals.
//!
//! The wire format is the string `"num/den"` with the fraction fully reduced
//! and the denominator positive; this string doubles as the deterministic
//! tiebreaker wherever an ordering on elements is needed. Input is lenient:
//! a bare integer `"5"` means `5/1`.

use crate::error::{HeckeError, Result};
use crate::{Int, Rational};
use num_traits::{One, Signed, Zero};

/// Render a rational as `"num/den"` (always including the denominator).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parse `"num/den"` or a bare integer string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: Int = num
        .parse()
        .map_err(|_| HeckeError::Parse(format!("bad rational numerator in {s:?}")))?;
    let d: Int = den
        .parse()
        .map_err(|_| HeckeError::Parse(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(HeckeError::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Convenience constructor from machine integers.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(Int::from(num), Int::from(den))
}

/// Convenience constructor for whole numbers.
pub fn integer(n: i64) -> Rational {
    Rational::from(Int::from(n))
}

/// Reduce into the fundamental domain `[0, 1)` of Q/Z.
pub fn mod_one(q: &Rational) -> Rational {
    q - q.floor()
}

/// True iff the rational is an integer.
pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// `|q|` as i64 when it is a small integer; used for index arithmetic.
pub fn to_i64(q: &Rational) -> Option<i64> {
    if is_integer(q) {
        i64::try_from(q.numer().clone()).ok()
    } else {
        None
    }
}

/// Exact absolute value.
pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_reduction() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(parse_rational("7").unwrap(), integer(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn mod_one_lands_in_unit_interval() {
        assert_eq!(mod_one(&rational(7, 2)), rational(1, 2));
        assert_eq!(mod_one(&rational(-1, 3)), rational(2, 3));
        assert_eq!(mod_one(&integer(-2)), integer(0));
    }
}
