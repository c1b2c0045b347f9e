//! Helpers around [`rug::Rational`], the exact rational type used throughout.

use rug::{Integer, Rational};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::from((n, d))
}

pub fn int(n: i64) -> Rational {
    Rational::from(n)
}

/// Parses `"p"`, `"p/q"` or a JSON-style integer string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Integer = n.trim().parse().map_err(|_| bad())?;
            let d: Integer = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::from((n, d)))
        }
        None => {
            let n: Integer = s.parse().map_err(|_| bad())?;
            Ok(Rational::from(n))
        }
    }
}

/// Formats as `"p"` for integers and `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    let fl = r.clone().floor();
    Rational::from(r - fl)
}

pub fn is_integer(r: &Rational) -> bool {
    *r.denom() == 1
}

/// Converts an integral rational to `i64`, panicking otherwise.
pub fn to_i64(r: &Rational) -> i64 {
    assert!(is_integer(r), "{r} is not an integer");
    r.numer().to_i64().expect("integer out of i64 range")
}
