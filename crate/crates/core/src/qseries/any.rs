//! Series whose coefficient domain is only known at run time, e.g. after parsing JSON.

use rug::Rational;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::qseries::coeff::Domain;
use crate::qseries::cyclotomic::Cyclotomic;
use crate::qseries::quadratic::Quadratic;
use crate::qseries::series::QSeries;

#[derive(Debug, Clone, PartialEq)]
pub enum AnySeries {
    Rational(QSeries<Rational>),
    Cyclotomic(QSeries<Cyclotomic>),
    Quadratic(QSeries<Quadratic>),
}

impl AnySeries {
    /// Parses a series, inferring the domain from the coefficient shapes.
    pub fn from_json(v: &Value) -> Result<Self> {
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("series needs a \"terms\" array".into()))?;
        let mut cyclo = false;
        let mut quad = false;
        for t in terms {
            if let Some(obj) = t.get(1).and_then(Value::as_object) {
                cyclo |= obj.contains_key("order");
                quad |= obj.contains_key("D1");
            }
        }
        match (cyclo, quad) {
            (true, true) => Err(Error::DomainMismatch("cyclotomic and quadratic coefficients in one series".into())),
            (true, false) => Ok(AnySeries::Cyclotomic(QSeries::from_json(v)?)),
            (false, true) => Ok(AnySeries::Quadratic(QSeries::from_json(v)?)),
            (false, false) => Ok(AnySeries::Rational(QSeries::from_json(v)?)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnySeries::Rational(s) => s.to_json(),
            AnySeries::Cyclotomic(s) => s.to_json(),
            AnySeries::Quadratic(s) => s.to_json(),
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        match self {
            AnySeries::Rational(s) => s.domain(),
            AnySeries::Cyclotomic(s) => s.domain(),
            AnySeries::Quadratic(s) => s.domain(),
        }
    }

    /// Collapses to a rational series when every coefficient is rational.
    pub fn simplify(self) -> Self {
        let r = match &self {
            AnySeries::Cyclotomic(s) => s.to_rational_series(),
            AnySeries::Quadratic(s) => s.to_rational_series(),
            AnySeries::Rational(_) => None,
        };
        r.map_or(self, AnySeries::Rational)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.add(b), |a, b| a.add(b), |a, b| a.add(b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.mul(b), |a, b| a.mul(b), |a, b| a.mul(b))
    }

    fn combine(
        &self,
        other: &Self,
        fr: impl Fn(&QSeries<Rational>, &QSeries<Rational>) -> QSeries<Rational>,
        fc: impl Fn(&QSeries<Cyclotomic>, &QSeries<Cyclotomic>) -> QSeries<Cyclotomic>,
        fq: impl Fn(&QSeries<Quadratic>, &QSeries<Quadratic>) -> QSeries<Quadratic>,
    ) -> Result<Self> {
        self.domain()?.join(other.domain()?)?;
        use AnySeries::*;
        let to_q = |s: &QSeries<rug::Rational>| s.map_coeffs(|c| crate::qseries::Quadratic::from_rational(c.clone()));
        Ok(match (self, other) {
            (Rational(a), Rational(b)) => Rational(fr(a, b)),
            (Cyclotomic(a), Cyclotomic(b)) => Cyclotomic(fc(a, b)),
            (Quadratic(a), Quadratic(b)) => Quadratic(fq(a, b)),
            (Rational(a), Cyclotomic(b)) => Cyclotomic(fc(&a.to_cyclotomic_series(), b)),
            (Cyclotomic(a), Rational(b)) => Cyclotomic(fc(a, &b.to_cyclotomic_series())),
            (Rational(a), Quadratic(b)) => Quadratic(fq(&to_q(a), b)),
            (Quadratic(a), Rational(b)) => Quadratic(fq(a, &to_q(b))),
            // one side has rational coefficients only, by the domain check
            (Cyclotomic(a), Quadratic(b)) => Cyclotomic(fc(a, &b.to_cyclotomic_series())),
            (Quadratic(a), Cyclotomic(b)) => Cyclotomic(fc(&a.to_cyclotomic_series(), b)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::int;

    #[test]
    fn promotion_and_rejection() {
        let r = AnySeries::Rational(QSeries::from_ints(0, &[1, 1], None));
        let z = AnySeries::Cyclotomic(QSeries::constant(Cyclotomic::root_of_unity(1, 3)));
        let q5 = AnySeries::Quadratic(QSeries::constant(Quadratic::sqrt(5)));
        let q13 = AnySeries::Quadratic(QSeries::constant(Quadratic::sqrt(13)));
        assert!(matches!(r.mul(&z).unwrap(), AnySeries::Cyclotomic(_)));
        assert!(matches!(r.add(&q5).unwrap(), AnySeries::Quadratic(_)));
        assert!(matches!(q5.mul(&q13), Err(Error::DomainMismatch(_))));
        assert!(matches!(z.mul(&q5), Err(Error::DomainMismatch(_))));
        let sq = q5.mul(&q5).unwrap().simplify();
        assert_eq!(sq, AnySeries::Rational(QSeries::constant(int(5))));
    }

    #[test]
    fn json_domain_detection() {
        let z = AnySeries::Cyclotomic(QSeries::constant(Cyclotomic::root_of_unity(1, 3)));
        assert_eq!(AnySeries::from_json(&z.to_json()).unwrap(), z);
        let q = AnySeries::Quadratic(QSeries::constant(Quadratic::sqrt(5)));
        assert_eq!(AnySeries::from_json(&q.to_json()).unwrap(), q);
    }
}
