//! Elements `a + b sqrt(D1)` of a real quadratic field.

use std::fmt;

use rug::Rational;

use crate::arith::kronecker;
use crate::qseries::cyclotomic::Cyclotomic;
use crate::qseries::rational::format_rational;

/// `a + b sqrt(d1)`. A `d1` of 0 marks an element not yet tied to a field,
/// which is only allowed when `b = 0`.
#[derive(Clone)]
pub struct Quadratic {
    d1: u64,
    a: Rational,
    b: Rational,
}

impl Quadratic {
    pub fn new(d1: u64, a: Rational, b: Rational) -> Self {
        assert!(d1 > 0 || b == 0, "irrational part without a field");
        Quadratic { d1, a, b }
    }

    pub fn from_rational(r: Rational) -> Self {
        Quadratic { d1: 0, a: r, b: Rational::new() }
    }

    /// `sqrt(d1)` itself.
    pub fn sqrt(d1: u64) -> Self {
        Quadratic { d1, a: Rational::new(), b: Rational::from(1) }
    }

    pub fn d1(&self) -> u64 {
        self.d1
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn to_rational(&self) -> Option<Rational> {
        (self.b == 0).then(|| self.a.clone())
    }

    /// Whether the two elements live in a common field.
    pub fn compatible(&self, other: &Self) -> bool {
        self.b == 0 || other.b == 0 || self.d1 == other.d1
    }

    fn field(&self, other: &Self) -> u64 {
        assert!(
            self.compatible(other),
            "mixing Q(sqrt {}) with Q(sqrt {})",
            self.d1,
            other.d1
        );
        if self.b != 0 {
            self.d1
        } else if other.b != 0 {
            other.d1
        } else {
            self.d1.max(other.d1)
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Quadratic {
            d1: self.field(other),
            a: Rational::from(&self.a + &other.a),
            b: Rational::from(&self.b + &other.b),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Quadratic {
            d1: self.field(other),
            a: Rational::from(&self.a - &other.a),
            b: Rational::from(&self.b - &other.b),
        }
    }

    pub fn neg(&self) -> Self {
        Quadratic { d1: self.d1, a: Rational::from(-&self.a), b: Rational::from(-&self.b) }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Quadratic { d1: self.d1, a: Rational::from(&self.a * r), b: Rational::from(&self.b * r) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d1 = self.field(other);
        let bb = Rational::from(&self.b * &other.b) * Rational::from(d1);
        Quadratic {
            d1,
            a: Rational::from(&self.a * &other.a) + bb,
            b: Rational::from(&self.a * &other.b) + Rational::from(&self.b * &other.a),
        }
    }

    pub fn conj(&self) -> Self {
        Quadratic { d1: self.d1, a: self.a.clone(), b: Rational::from(-&self.b) }
    }

    pub fn norm(&self) -> Rational {
        Rational::from(&self.a * &self.a) - Rational::from(&self.b * &self.b) * Rational::from(self.d1)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm().recip();
        Some(self.conj().scale(&n))
    }

    /// Embedding into `Q(zeta_D1)` via `sqrt(D1) = sum_{b mod D1} (D1|b) e(b/D1)`,
    /// valid for positive fundamental `D1`.
    pub fn to_cyclotomic(&self) -> Cyclotomic {
        if self.b == 0 {
            return Cyclotomic::from_rational(self.a.clone());
        }
        let d = self.d1 as i64;
        let gauss = Cyclotomic::from_exponents(
            self.d1,
            (1..d).map(|x| (x, Rational::from(kronecker(d, x)))),
        );
        gauss.scale(&self.b).add(&Cyclotomic::from_rational(self.a.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * (self.d1 as f64).sqrt()
    }
}

impl PartialEq for Quadratic {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b == 0 || self.d1 == other.d1)
    }
}

impl fmt::Debug for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", format_rational(&self.a))
        } else {
            write!(
                f,
                "{} + {}*sqrt({})",
                format_rational(&self.a),
                format_rational(&self.b),
                self.d1
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::{int, rat};

    #[test]
    fn arithmetic_in_q_sqrt5() {
        let x = Quadratic::new(5, rat(1, 2), rat(1, 2));
        // golden ratio: x^2 = x + 1
        assert_eq!(x.mul(&x), x.add(&Quadratic::from_rational(int(1))));
        assert_eq!(x.mul(&x.inv().unwrap()), Quadratic::from_rational(int(1)));
        assert_eq!(x.sub(&x).to_rational(), Some(int(0)));
    }

    #[test]
    fn gauss_sum_embedding() {
        for d in [5u64, 8, 12, 13] {
            let s = Quadratic::sqrt(d).to_cyclotomic();
            assert_eq!(s.mul(&s), Cyclotomic::from_rational(int(d as i64)), "D1 = {d}");
            let (re, im) = s.to_f64();
            assert!((re - (d as f64).sqrt()).abs() < 1e-9 && im.abs() < 1e-9);
        }
    }

    #[test]
    #[should_panic]
    fn different_fields_do_not_mix() {
        let _ = Quadratic::sqrt(5).add(&Quadratic::sqrt(13));
    }
}
