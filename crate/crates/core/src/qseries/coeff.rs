//! The [`Coefficient`] trait tying the exact number domains to series arithmetic.

use std::fmt;

use rug::Rational;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::qseries::bigfloat::BigFloatComplex;
use crate::qseries::cyclotomic::Cyclotomic;
use crate::qseries::quadratic::Quadratic;
use crate::qseries::rational::{format_rational, parse_rational};

/// Which exact field a coefficient lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Rational,
    /// Smallest cyclotomic order seen so far.
    Cyclotomic(u64),
    /// `Q(sqrt D1)`; `0` while no irrational element has been seen.
    Quadratic(u64),
}

impl Domain {
    /// Smallest common extension, if one exists within the tower.
    pub fn join(self, other: Domain) -> Result<Domain> {
        use Domain::*;
        match (self, other) {
            (Rational, d) | (d, Rational) => Ok(d),
            (Cyclotomic(a), Cyclotomic(b)) => Ok(Cyclotomic(crate::arith::lcm_u(a, b))),
            (Quadratic(a), Quadratic(b)) if a == b || a == 0 || b == 0 => Ok(Quadratic(a.max(b))),
            (a, b) => Err(Error::DomainMismatch(format!("{a:?} and {b:?}"))),
        }
    }
}

pub trait Coefficient: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn inv(&self) -> Option<Self>;
    fn to_rational(&self) -> Option<Rational>;
    fn to_cyclotomic(&self) -> Cyclotomic;
    fn domain(&self) -> Domain;
    fn to_complex(&self, digits: u32) -> BigFloatComplex;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn add_assign(&mut self, other: &Self) {
        *self = Coefficient::add(self, other);
    }

    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = Coefficient::add(self, &Coefficient::mul(a, b));
    }
}

impl Coefficient for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, other: &Self) -> Self {
        Rational::from(self + other)
    }
    fn sub(&self, other: &Self) -> Self {
        Rational::from(self - other)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn mul(&self, other: &Self) -> Self {
        Rational::from(self * other)
    }
    fn scale(&self, r: &Rational) -> Self {
        Rational::from(self * r)
    }
    fn inv(&self) -> Option<Self> {
        (*self != 0).then(|| self.clone().recip())
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn to_cyclotomic(&self) -> Cyclotomic {
        Cyclotomic::from_rational(self.clone())
    }
    fn domain(&self) -> Domain {
        Domain::Rational
    }
    fn to_complex(&self, digits: u32) -> BigFloatComplex {
        BigFloatComplex::from_rational(self, digits)
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        json_rational(v)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
}

impl Coefficient for Cyclotomic {
    fn zero() -> Self {
        Cyclotomic::zero()
    }
    fn one() -> Self {
        Cyclotomic::one()
    }
    fn from_rational(r: Rational) -> Self {
        Cyclotomic::from_rational(r)
    }
    fn is_zero(&self) -> bool {
        Cyclotomic::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Cyclotomic::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Cyclotomic::sub(self, other)
    }
    fn neg(&self) -> Self {
        Cyclotomic::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        Cyclotomic::mul(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        Cyclotomic::scale(self, r)
    }
    fn inv(&self) -> Option<Self> {
        Cyclotomic::inv(self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Cyclotomic::to_rational(self)
    }
    fn to_cyclotomic(&self) -> Cyclotomic {
        self.clone()
    }
    fn domain(&self) -> Domain {
        if self.to_rational().is_some() {
            Domain::Rational
        } else {
            Domain::Cyclotomic(self.order())
        }
    }
    fn to_complex(&self, digits: u32) -> BigFloatComplex {
        let mut acc = BigFloatComplex::zero(digits);
        let n = self.order() as i64;
        for (k, c) in self.exponent_table() {
            let z = BigFloatComplex::from_rational(&Rational::from((k as i64, n)), digits).e();
            acc = acc.add(&z.scale_rational(&c));
        }
        acc
    }
    fn to_json(&self) -> Value {
        let coeffs: Map<String, Value> = self
            .exponent_table()
            .into_iter()
            .map(|(k, c)| (k.to_string(), Value::String(format_rational(&c))))
            .collect();
        json!({ "order": self.order(), "coeffs": coeffs })
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Object(obj) => {
                let order = obj
                    .get("order")
                    .and_then(Value::as_u64)
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::Json("cyclotomic element needs a positive \"order\"".into()))?;
                let coeffs = obj
                    .get("coeffs")
                    .and_then(Value::as_object)
                    .ok_or_else(|| Error::Json("cyclotomic element needs \"coeffs\"".into()))?;
                let mut terms = Vec::with_capacity(coeffs.len());
                for (k, c) in coeffs {
                    let k: i64 = k
                        .parse()
                        .map_err(|_| Error::Json(format!("bad cyclotomic exponent {k:?}")))?;
                    terms.push((k, json_rational(c)?));
                }
                Ok(Cyclotomic::from_exponents(order, terms))
            }
            other => json_rational(other).map(Cyclotomic::from_rational),
        }
    }
}

impl Coefficient for Quadratic {
    fn zero() -> Self {
        Quadratic::from_rational(Rational::new())
    }
    fn one() -> Self {
        Quadratic::from_rational(Rational::from(1))
    }
    fn from_rational(r: Rational) -> Self {
        Quadratic::from_rational(r)
    }
    fn is_zero(&self) -> bool {
        Quadratic::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Quadratic::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Quadratic::sub(self, other)
    }
    fn neg(&self) -> Self {
        Quadratic::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        Quadratic::mul(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        Quadratic::scale(self, r)
    }
    fn inv(&self) -> Option<Self> {
        Quadratic::inv(self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Quadratic::to_rational(self)
    }
    fn to_cyclotomic(&self) -> Cyclotomic {
        Quadratic::to_cyclotomic(self)
    }
    fn domain(&self) -> Domain {
        if *self.b() == 0 {
            Domain::Rational
        } else {
            Domain::Quadratic(self.d1())
        }
    }
    fn to_complex(&self, digits: u32) -> BigFloatComplex {
        let a = BigFloatComplex::from_rational(self.a(), digits);
        if *self.b() == 0 {
            return a;
        }
        let root = BigFloatComplex::from_rational(&Rational::from(self.d1()), digits).sqrt();
        a.add(&root.scale_rational(self.b()))
    }
    fn to_json(&self) -> Value {
        json!({
            "a": format_rational(self.a()),
            "b": format_rational(self.b()),
            "D1": self.d1(),
        })
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Object(obj) => {
                let get = |k: &str| {
                    obj.get(k)
                        .ok_or_else(|| Error::Json(format!("quadratic element needs {k:?}")))
                        .and_then(json_rational)
                };
                let d1 = obj
                    .get("D1")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Json("quadratic element needs a positive \"D1\"".into()))?;
                let (a, b) = (get("a")?, get("b")?);
                if d1 == 0 && b != 0 {
                    return Err(Error::Json("quadratic element with D1 = 0".into()));
                }
                Ok(Quadratic::new(d1, a, b))
            }
            other => json_rational(other).map(Quadratic::from_rational),
        }
    }
}

/// Accepts `"p/q"` strings and JSON integers.
pub fn json_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::from(n.as_i64().unwrap())),
        Value::Number(n) if n.is_u64() => Ok(Rational::from(n.as_u64().unwrap())),
        other => Err(Error::Json(format!("expected an exact rational, found {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::{int, rat};

    #[test]
    fn domain_tower() {
        use Domain::*;
        assert_eq!(Rational.join(Cyclotomic(4)).unwrap(), Cyclotomic(4));
        assert_eq!(Cyclotomic(4).join(Cyclotomic(6)).unwrap(), Cyclotomic(12));
        assert_eq!(Quadratic(5).join(Quadratic(0)).unwrap(), Quadratic(5));
        assert!(Quadratic(5).join(Quadratic(13)).is_err());
        assert!(Quadratic(5).join(Cyclotomic(5)).is_err());
    }

    #[test]
    fn json_round_trips() {
        let r = rat(-7, 3);
        assert_eq!(<Rational as Coefficient>::from_json(&r.to_json()).unwrap(), r);
        let z = Cyclotomic::root_of_unity(1, 5).scale(&rat(3, 2));
        assert_eq!(Cyclotomic::from_json(&Coefficient::to_json(&z)).unwrap(), z);
        let q = Quadratic::new(13, rat(1, 2), int(-3));
        assert_eq!(Quadratic::from_json(&Coefficient::to_json(&q)).unwrap(), q);
        assert!(<Rational as Coefficient>::from_json(&json!(1.5)).is_err());
    }

    #[test]
    fn complex_embeddings() {
        let z = Cyclotomic::root_of_unity(1, 4);
        let c = Coefficient::to_complex(&z, 30);
        assert!(c.dist(&BigFloatComplex::i(30)) < 1e-25);
        let q = Quadratic::new(5, int(1), int(1));
        let (re, im) = Coefficient::to_complex(&q, 30).to_f64();
        assert!((re - 1.0 - 5f64.sqrt()).abs() < 1e-12 && im == 0.0);
    }
}
