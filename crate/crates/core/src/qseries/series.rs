//! Truncated Laurent series in `q` with exponents in `(1/M)Z`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops;

use rug::Rational;
use serde_json::{json, Value};

use crate::arith::{gcd, lcm_u};
use crate::error::{Error, Result};
use crate::qseries::bigfloat::BigFloatComplex;
use crate::qseries::coeff::{Coefficient, Domain};
use crate::qseries::cyclotomic::Cyclotomic;
use crate::qseries::rational::{format_rational, parse_rational};

/// A series `sum_k c_k q^(k/M)`, known exactly for all exponents below the
/// truncation order. `trunc = None` marks an exact (finite) series.
///
/// Internally exponents are stored as integer keys `k = M * exponent`.
#[derive(Clone)]
pub struct QSeries<C: Coefficient = Rational> {
    lattice: u64,
    terms: BTreeMap<i64, C>,
    trunc: Option<i64>,
}

fn key_of(e: &Rational, lattice: u64) -> Option<i64> {
    let k = Rational::from(e * lattice);
    (*k.denom() == 1).then(|| k.numer().to_i64().expect("exponent out of range"))
}

fn ceil_key(e: &Rational, lattice: u64) -> i64 {
    let k = Rational::from(e * lattice).ceil();
    k.numer().to_i64().expect("truncation out of range")
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<C: Coefficient> QSeries<C> {
    /// Builds a series from lattice keys; zero coefficients and keys at or
    /// beyond the truncation are dropped.
    pub fn from_keys<I>(lattice: u64, terms: I, trunc: Option<i64>) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
    {
        assert!(lattice > 0, "denominator lattice must be positive");
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (k, c) in terms {
            if trunc.map_or(false, |t| k >= t) {
                continue;
            }
            match map.get_mut(&k) {
                Some(v) => v.add_assign(&c),
                None => {
                    map.insert(k, c);
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        QSeries { lattice, terms: map, trunc }
    }

    /// Builds a series from rational exponents; the lattice is the least
    /// common denominator of the exponents and the truncation order.
    pub fn from_terms<I>(terms: I, trunc: Option<Rational>) -> Self
    where
        I: IntoIterator<Item = (Rational, C)>,
    {
        let terms: Vec<(Rational, C)> = terms.into_iter().collect();
        let mut lattice = 1u64;
        for (e, _) in &terms {
            lattice = lcm_u(lattice, e.denom().to_u64().expect("denominator out of range"));
        }
        if let Some(t) = &trunc {
            lattice = lcm_u(lattice, t.denom().to_u64().expect("denominator out of range"));
        }
        let tk = trunc.as_ref().map(|t| key_of(t, lattice).unwrap());
        Self::from_keys(
            lattice,
            terms.into_iter().map(|(e, c)| (key_of(&e, lattice).unwrap(), c)),
            tk,
        )
    }

    /// Integer-exponent series `sum_i coeffs[i] q^(start + i)`.
    pub fn from_ints(start: i64, coeffs: &[i64], trunc: Option<i64>) -> Self {
        Self::from_keys(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (start + i as i64, C::from_rational(Rational::from(c)))),
            trunc,
        )
    }

    pub fn zero() -> Self {
        QSeries { lattice: 1, terms: BTreeMap::new(), trunc: None }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::from_keys(1, [(0, c)], None)
    }

    /// `c q^e`, exact.
    pub fn monomial(c: C, e: &Rational) -> Self {
        Self::from_terms([(e.clone(), c)], None)
    }

    /// The zero series known only below `t`, i.e. `O(q^t)`.
    pub fn big_o(t: &Rational) -> Self {
        Self::from_terms(std::iter::empty(), Some(t.clone()))
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn trunc_key(&self) -> Option<i64> {
        self.trunc
    }

    pub fn truncation(&self) -> Option<Rational> {
        self.trunc.map(|t| Rational::from((t, self.lattice)))
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn keys(&self) -> &BTreeMap<i64, C> {
        &self.terms
    }

    /// `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational, &C)> + '_ {
        let m = self.lattice as i64;
        self.terms.iter().map(move |(&k, c)| (Rational::from((k, m)), c))
    }

    /// The coefficient of `q^e`, or `None` when `e` lies at or beyond the
    /// truncation order.
    pub fn get(&self, e: &Rational) -> Option<C> {
        if let Some(t) = self.truncation() {
            if *e >= t {
                return None;
            }
        }
        Some(match key_of(e, self.lattice) {
            Some(k) => self.terms.get(&k).cloned().unwrap_or_else(C::zero),
            None => C::zero(),
        })
    }

    /// The coefficient of `q^e`. Panics when `e` is beyond the truncation.
    pub fn coeff(&self, e: &Rational) -> C {
        self.get(e)
            .unwrap_or_else(|| panic!("coefficient of q^{e} lies beyond the truncation order"))
    }

    /// The coefficient of `q^n` for integer `n`.
    pub fn coeff_int(&self, n: i64) -> C {
        self.coeff(&Rational::from(n))
    }

    pub fn valuation(&self) -> Option<Rational> {
        self.terms.keys().next().map(|&k| Rational::from((k, self.lattice as i64)))
    }

    pub fn leading(&self) -> Option<(Rational, &C)> {
        self.terms.iter().next().map(|(&k, c)| (Rational::from((k, self.lattice as i64)), c))
    }

    /// Field of definition of all coefficients.
    pub fn domain(&self) -> Result<Domain> {
        self.terms.values().try_fold(Domain::Rational, |d, c| d.join(c.domain()))
    }

    /// Re-expresses the series on a finer lattice `target`, a multiple of the current one.
    pub fn with_lattice(&self, target: u64) -> Self {
        assert!(target % self.lattice == 0, "lattice {target} does not refine {}", self.lattice);
        let f = (target / self.lattice) as i64;
        QSeries {
            lattice: target,
            terms: self.terms.iter().map(|(&k, c)| (k * f, c.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
        }
    }

    /// The coarsest lattice carrying all exponents and the truncation order.
    pub fn normalized(&self) -> Self {
        let mut g = self.lattice as i64;
        for &k in self.terms.keys() {
            g = gcd(g, k);
        }
        if let Some(t) = self.trunc {
            g = gcd(g, t);
        }
        let g = g.max(1);
        QSeries {
            lattice: self.lattice / g as u64,
            terms: self.terms.iter().map(|(&k, c)| (k / g, c.clone())).collect(),
            trunc: self.trunc.map(|t| t / g),
        }
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let l = lcm_u(self.lattice, other.lattice);
        (self.with_lattice(l), other.with_lattice(l))
    }

    /// Lowers the truncation order to `t` (never raises it).
    pub fn truncate(&self, t: &Rational) -> Self {
        let tk = ceil_key(t, self.lattice);
        let trunc = min_opt(self.trunc, Some(tk));
        QSeries {
            lattice: self.lattice,
            terms: self.terms.range(..trunc.unwrap()).map(|(&k, c)| (k, c.clone())).collect(),
            trunc,
        }
    }

    pub fn truncate_int(&self, t: i64) -> Self {
        self.truncate(&Rational::from(t))
    }

    /// Keeps only the terms whose exponent satisfies `keep`.
    pub fn filter<F: Fn(&Rational) -> bool>(&self, keep: F) -> Self {
        let m = self.lattice as i64;
        QSeries {
            lattice: self.lattice,
            terms: self
                .terms
                .iter()
                .filter(|(&k, _)| keep(&Rational::from((k, m))))
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
            trunc: self.trunc,
        }
    }

    pub fn map_coeffs<D: Coefficient, F: Fn(&C) -> D>(&self, f: F) -> QSeries<D> {
        QSeries::from_keys(self.lattice, self.terms.iter().map(|(&k, c)| (k, f(c))), self.trunc)
    }

    /// The same series over `Q`, if every coefficient is rational.
    pub fn to_rational_series(&self) -> Option<QSeries<Rational>> {
        let mut terms = BTreeMap::new();
        for (&k, c) in &self.terms {
            terms.insert(k, c.to_rational()?);
        }
        Some(QSeries { lattice: self.lattice, terms, trunc: self.trunc })
    }

    pub fn to_cyclotomic_series(&self) -> QSeries<Cyclotomic> {
        self.map_coeffs(|c| c.to_cyclotomic())
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let trunc = min_opt(a.trunc, b.trunc);
        let mut terms = a.terms;
        for (k, c) in b.terms {
            match terms.get_mut(&k) {
                Some(v) => v.add_assign(&c),
                None => {
                    terms.insert(k, c);
                }
            }
        }
        Self::from_keys(a.lattice, terms, trunc)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QSeries {
            lattice: self.lattice,
            terms: self.terms.iter().map(|(&k, c)| (k, c.neg())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.scale_by(&C::from_rational(r.clone()))
    }

    pub fn scale_by(&self, c: &C) -> Self {
        Self::from_keys(self.lattice, self.terms.iter().map(|(&k, v)| (k, v.mul(c))), self.trunc)
    }

    /// Multiplication by `q^e`.
    pub fn shift(&self, e: &Rational) -> Self {
        let l = lcm_u(self.lattice, e.denom().to_u64().expect("denominator out of range"));
        let a = self.with_lattice(l);
        let s = key_of(e, l).unwrap();
        QSeries {
            lattice: l,
            terms: a.terms.into_iter().map(|(k, c)| (k + s, c)).collect(),
            trunc: a.trunc.map(|t| t + s),
        }
    }

    /// Valuation used for truncation bookkeeping: the first stored key, or
    /// the truncation order for a series not yet known to be nonzero.
    /// `None` for the exact zero series.
    fn book_valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied().or(self.trunc)
    }

    /// Checked product; fails when the coefficient fields do not embed in a common one.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.domain()?.join(other.domain()?)?;
        Ok(self.mul(other))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.domain()?.join(other.domain()?)?;
        Ok(self.add(other))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let lattice = a.lattice;
        let (va, vb) = match (a.book_valuation(), b.book_valuation()) {
            (Some(x), Some(y)) => (x, y),
            _ => return QSeries { lattice, terms: BTreeMap::new(), trunc: None },
        };
        let trunc = min_opt(a.trunc.map(|t| t + vb), b.trunc.map(|t| t + va));
        if a.terms.is_empty() || b.terms.is_empty() {
            return QSeries { lattice, terms: BTreeMap::new(), trunc };
        }
        let lo = a.terms.keys().next().unwrap() + b.terms.keys().next().unwrap();
        let hi_exact = a.terms.keys().next_back().unwrap() + b.terms.keys().next_back().unwrap() + 1;
        let hi = trunc.map_or(hi_exact, |t| t.min(hi_exact));
        if hi <= lo {
            return QSeries { lattice, terms: BTreeMap::new(), trunc };
        }
        let mut acc: Vec<Option<C>> = vec![None; (hi - lo) as usize];
        let bterms: Vec<(i64, &C)> = b.terms.iter().map(|(&k, c)| (k, c)).collect();
        for (&ka, ca) in &a.terms {
            for &(kb, cb) in &bterms {
                let k = ka + kb;
                if k >= hi {
                    break;
                }
                let slot = &mut acc[(k - lo) as usize];
                match slot {
                    Some(v) => v.add_mul(ca, cb),
                    None => *slot = Some(ca.mul(cb)),
                }
            }
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .filter_map(|(i, c)| c.filter(|c| !c.is_zero()).map(|c| (lo + i as i64, c)))
            .collect();
        QSeries { lattice, terms, trunc }
    }

    /// Nonnegative or negative integer power; negative powers need [`QSeries::inv`].
    pub fn pow(&self, n: i64) -> Result<Self> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// `(1 - a q^n)^e` below `q^prec` for any integer `e`, by the binomial series.
    pub fn binomial(a: &C, n: i64, e: &rug::Integer, prec: i64) -> Self {
        assert!(n > 0, "binomial factor needs a positive step");
        let e = Rational::from(e);
        let minus_a = a.neg();
        let mut c = C::one();
        let mut terms = vec![(0, c.clone())];
        let mut k = 1i64;
        while k * n < prec {
            let f = Rational::from(&e - (k - 1)) / k;
            if f == 0 {
                break;
            }
            c = c.mul(&minus_a).scale(&f);
            terms.push((k * n, c.clone()));
            k += 1;
        }
        Self::from_keys(1, terms, Some(prec))
    }

    /// Multiplicative inverse. The leading coefficient must be invertible and a
    /// non-monomial exact series must be truncated first.
    pub fn inv(&self) -> Result<Self> {
        let (&v, c) = self.terms.iter().next().ok_or(Error::NotInvertible)?;
        let cinv = c.inv().ok_or(Error::NotInvertible)?;
        let t = match self.trunc {
            Some(t) => t,
            None if self.terms.len() == 1 => {
                return Ok(Self::from_keys(self.lattice, [(-v, cinv)], None));
            }
            None => {
                return Err(Error::Precision(
                    "inverse of an exact non-monomial series needs a truncation order".into(),
                ))
            }
        };
        let r = (t - v) as usize;
        let a: Vec<(usize, &C)> = self
            .terms
            .iter()
            .skip(1)
            .map(|(&k, c)| ((k - v) as usize, c))
            .collect();
        let mut b: Vec<C> = Vec::with_capacity(r);
        b.push(cinv.clone());
        for k in 1..r {
            let mut s = C::zero();
            for &(i, ai) in &a {
                if i > k {
                    break;
                }
                s.add_mul(ai, &b[k - i]);
            }
            b.push(s.mul(&cinv).neg());
        }
        Ok(Self::from_keys(
            self.lattice,
            b.into_iter().enumerate().map(|(i, c)| (i as i64 - v, c)),
            Some(t - 2 * v),
        ))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Formal exponential of a series with only positive exponents.
    pub fn exp(&self) -> Result<Self> {
        if let Some(&k) = self.terms.keys().next() {
            if k <= 0 {
                return Err(Error::Divergent(format_rational(&Rational::from((
                    k,
                    self.lattice as i64,
                )))));
            }
        }
        let t = match self.trunc {
            Some(t) => t,
            None if self.terms.is_empty() => return Ok(Self::one()),
            None => {
                return Err(Error::Precision(
                    "exponential of an exact nonzero series needs a truncation order".into(),
                ))
            }
        };
        if t <= 0 {
            return Ok(Self::from_keys(self.lattice, [], Some(t)));
        }
        let ja: Vec<(usize, C)> = self
            .terms
            .iter()
            .map(|(&j, c)| (j as usize, c.scale(&Rational::from(j))))
            .collect();
        let n = t as usize;
        let mut f: Vec<C> = Vec::with_capacity(n);
        f.push(C::one());
        for k in 1..n {
            let mut s = C::zero();
            for (j, a) in &ja {
                if *j > k {
                    break;
                }
                s.add_mul(a, &f[k - j]);
            }
            f.push(s.scale(&Rational::from((1, k as i64))));
        }
        Ok(Self::from_keys(
            self.lattice,
            f.into_iter().enumerate().map(|(i, c)| (i as i64, c)),
            Some(t),
        ))
    }

    /// Formal logarithm of a series `1 + (positive exponents)`.
    pub fn log(&self) -> Result<Self> {
        match self.terms.iter().next() {
            Some((&0, c)) if *c == C::one() => {}
            Some((&k, c)) => {
                return Err(Error::LogLeadingTerm(format!(
                    "{c}*q^{}",
                    format_rational(&Rational::from((k, self.lattice as i64)))
                )))
            }
            None => return Err(Error::LogLeadingTerm("0".into())),
        }
        let t = match self.trunc {
            Some(t) => t,
            None if self.terms.len() == 1 => return Ok(Self::zero()),
            None => {
                return Err(Error::Precision(
                    "logarithm of an exact non-constant series needs a truncation order".into(),
                ))
            }
        };
        let a: Vec<(usize, &C)> =
            self.terms.iter().skip(1).map(|(&k, c)| (k as usize, c)).collect();
        let n = t.max(1) as usize;
        // c_k = k b_k
        let mut cs: Vec<C> = vec![C::zero(); n];
        for k in 1..n {
            let mut s = self
                .terms
                .get(&(k as i64))
                .map(|c| c.scale(&Rational::from(k as i64)))
                .unwrap_or_else(C::zero);
            for &(i, ai) in &a {
                if i >= k {
                    break;
                }
                s = s.sub(&ai.mul(&cs[k - i]));
            }
            cs[k] = s;
        }
        Ok(Self::from_keys(
            self.lattice,
            cs.into_iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| (k as i64, c.scale(&Rational::from((1, k as i64))))),
            Some(t),
        ))
    }

    /// `f(s tau)`: every exponent is multiplied by the positive rational `s`.
    pub fn rescale(&self, s: &Rational) -> Self {
        assert!(*s > 0, "rescale factor must be positive");
        let p = s.numer().to_i64().expect("scale out of range");
        let q = s.denom().to_i64().expect("scale out of range");
        let mq = self.lattice as i64 * q;
        let g = gcd(mq, p);
        QSeries {
            lattice: (mq / g) as u64,
            terms: self.terms.iter().map(|(&k, c)| (k * (p / g), c.clone())).collect(),
            trunc: self.trunc.map(|t| t * (p / g)),
        }
    }

    /// `f(s tau + beta)`: rescales exponents by `s` and twists `c q^e` by `e(e beta)`.
    pub fn substitute(&self, s: &Rational, beta: &Rational) -> QSeries<Cyclotomic> {
        let m = self.lattice as i64;
        let twisted = QSeries::from_keys(
            self.lattice,
            self.terms.iter().map(|(&k, c)| {
                let phase = Rational::from((k, m)) * beta;
                (k, c.to_cyclotomic().mul(&Cyclotomic::e(&phase)))
            }),
            self.trunc,
        );
        twisted.rescale(s)
    }

    /// Whether the two series agree on every exponent below `t`; both must be
    /// known there.
    pub fn agrees_below(&self, other: &Self, t: &Rational) -> bool {
        let known = |x: &Self| x.truncation().map_or(true, |tx| tx >= *t);
        if !known(self) || !known(other) {
            return false;
        }
        self.truncate(t) == other.truncate(t)
    }

    /// Tail estimate `sum_{n >= T} e^(4 pi sqrt n) |q|^n` for the series
    /// truncated at `T`, as a natural logarithm; `None` if the bound diverges.
    pub fn log_tail_bound(&self, im_tau: f64) -> Option<f64> {
        let t = self.truncation()?.to_f64();
        log_tail_bound(t, self.lattice, im_tau)
    }

    /// Numerical value at `tau` with a tail check against `10^-(digits-10)`.
    pub fn evaluate(&self, tau: &BigFloatComplex, digits: u32) -> Result<BigFloatComplex> {
        let im = tau.im().to_f64();
        if im <= 0.0 {
            return Err(Error::InvalidInput("evaluation point must lie in the upper half-plane".into()));
        }
        if let Some(t) = self.truncation() {
            let tol = -(f64::from(digits.saturating_sub(10))) * std::f64::consts::LN_10;
            let ok = log_tail_bound(t.to_f64(), self.lattice, im).map_or(false, |b| b < tol);
            if !ok {
                let need = required_order(self.lattice, im, tol);
                return Err(Error::Precision(format!(
                    "truncation q^{} too low for {digits} digits at Im(tau) = {im:.4}; need order {}",
                    format_rational(&t),
                    need.map_or("unbounded".to_string(), |n| n.to_string())
                )));
            }
        }
        let tau = BigFloatComplex::new(tau.re().clone(), tau.im().clone(), digits);
        let base = tau.scale_rational(&Rational::from((1, self.lattice as i64))).e();
        let mut acc = BigFloatComplex::zero(digits);
        let mut cur: Option<(i64, BigFloatComplex)> = None;
        for (&k, c) in &self.terms {
            let p = match cur.take() {
                None => base.powi(k),
                Some((k0, p0)) if k - k0 == 1 => p0.mul(&base),
                Some((k0, p0)) => p0.mul(&base.powi(k - k0)),
            };
            acc = acc.add(&c.to_complex(digits).mul(&p));
            cur = Some((k, p));
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(e, c)| json!([format_rational(&e), c.to_json()]))
            .collect();
        json!({
            "denom_lattice": self.lattice,
            "truncation": self.truncation().map(|t| format_rational(&t)),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Json("series must be an object".into()))?;
        let lattice = obj
            .get("denom_lattice")
            .and_then(Value::as_u64)
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::Json("series needs a positive \"denom_lattice\"".into()))?;
        let trunc = match obj.get("truncation") {
            None | Some(Value::Null) => None,
            Some(t) => {
                let t = crate::qseries::coeff::json_rational(t)?;
                Some(key_of(&t, lattice).ok_or_else(|| {
                    Error::Json(format!("truncation {t} is not on the lattice (1/{lattice})Z"))
                })?)
            }
        };
        let raw = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("series needs a \"terms\" array".into()))?;
        let mut terms = Vec::with_capacity(raw.len());
        for (i, t) in raw.iter().enumerate() {
            let pair = t
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Json(format!("terms[{i}] must be an [exponent, coefficient] pair")))?;
            let e = match &pair[0] {
                Value::String(s) => parse_rational(s)?,
                other => crate::qseries::coeff::json_rational(other)?,
            };
            let k = key_of(&e, lattice)
                .ok_or_else(|| Error::Json(format!("terms[{i}]: exponent {e} is not on the lattice")))?;
            if trunc.map_or(false, |tk| k >= tk) {
                return Err(Error::Json(format!("terms[{i}]: exponent {e} is not below the truncation")));
            }
            terms.push((k, C::from_json(&pair[1]).map_err(|err| Error::Json(format!("terms[{i}]: {err}")))?));
        }
        Ok(Self::from_keys(lattice, terms, trunc))
    }
}

fn log_tail_bound(t: f64, lattice: u64, im_tau: f64) -> Option<f64> {
    if t <= 0.0 {
        return None;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let log_q = -two_pi * im_tau;
    let log_rho = two_pi / (lattice as f64 * t.sqrt()) + log_q / lattice as f64;
    if log_rho >= 0.0 {
        return None;
    }
    Some(4.0 * std::f64::consts::PI * t.sqrt() + t * log_q - (-log_rho.exp()).ln_1p())
}

/// Smallest integer order whose tail bound is below `exp(tol)`.
fn required_order(lattice: u64, im_tau: f64, tol: f64) -> Option<i64> {
    (1..1_000_000i64).find(|&n| log_tail_bound(n as f64, lattice, im_tau).map_or(false, |b| b < tol))
}

impl<C: Coefficient> PartialEq for QSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        a.trunc == b.trunc && a.terms == b.terms
    }
}

impl<C: Coefficient> fmt::Debug for QSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coefficient> fmt::Display for QSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(e, c)| {
                if e == 0 {
                    format!("{c}")
                } else {
                    format!("({c})*q^{}", format_rational(&e))
                }
            })
            .collect();
        if let Some(t) = self.truncation() {
            parts.push(format!("O(q^{})", format_rational(&t)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl<C: Coefficient> ops::Add for &QSeries<C> {
    type Output = QSeries<C>;
    fn add(self, rhs: Self) -> QSeries<C> {
        QSeries::add(self, rhs)
    }
}

impl<C: Coefficient> ops::Sub for &QSeries<C> {
    type Output = QSeries<C>;
    fn sub(self, rhs: Self) -> QSeries<C> {
        QSeries::sub(self, rhs)
    }
}

impl<C: Coefficient> ops::Mul for &QSeries<C> {
    type Output = QSeries<C>;
    fn mul(self, rhs: Self) -> QSeries<C> {
        QSeries::mul(self, rhs)
    }
}

impl<C: Coefficient> ops::Neg for &QSeries<C> {
    type Output = QSeries<C>;
    fn neg(self) -> QSeries<C> {
        QSeries::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::{int, rat};

    type S = QSeries<Rational>;

    #[test]
    fn difference_of_squares() {
        let a = S::from_ints(0, &[1, 1], None);
        let b = S::from_ints(0, &[1, -1], None);
        assert_eq!(&a * &b, S::from_ints(0, &[1, 0, -1], None));
    }

    #[test]
    fn fractional_exponents_add() {
        let a = S::monomial(int(1), &int(-1));
        let b = S::monomial(int(1), &rat(1, 4));
        let p = &a * &b;
        assert_eq!(p.lattice(), 4);
        assert_eq!(p, S::monomial(int(1), &rat(-3, 4)));
    }

    #[test]
    fn truncation_propagates() {
        // (q^-1 + O(q^3)) * (q^2 + O(q^5)) = q + O(q^4)
        let a = S::from_ints(-1, &[1], Some(3));
        let b = S::from_ints(2, &[1], Some(5));
        let p = &a * &b;
        assert_eq!(p.truncation(), Some(int(4)));
        assert_eq!((&a + &b).truncation(), Some(int(3)));
        assert_eq!(p.coeff_int(1), 1);
        assert!(p.get(&int(4)).is_none());
    }

    #[test]
    fn exp_log_basics() {
        let t = Some(8);
        assert_eq!(S::from_keys(1, [], t).exp().unwrap(), S::from_keys(1, [(0, int(1))], t));
        let l = S::from_ints(0, &[1, -1], Some(6)).log().unwrap();
        let expect = S::from_terms((1..6).map(|k| (int(k), rat(-1, k))), Some(int(6)));
        assert_eq!(l, expect);
        let s = S::from_terms((1..10).map(|k| (int(k), rat(-2, k))), Some(int(10)));
        assert_eq!(s.exp().unwrap(), S::from_ints(0, &[1, -2, 1], Some(10)));
        assert!(matches!(S::from_ints(0, &[1, 1], Some(4)).exp(), Err(Error::Divergent(_))));
        assert!(matches!(S::from_ints(0, &[2, 1], Some(4)).log(), Err(Error::LogLeadingTerm(_))));
    }

    #[test]
    fn inverse_of_geometric() {
        let a = S::from_ints(0, &[1, -1], Some(10));
        let inv = a.inv().unwrap();
        assert_eq!(inv, S::from_ints(0, &[1; 10], Some(10)));
        let b = S::from_ints(-1, &[1, 3, 2], Some(6));
        let one = &b * &b.inv().unwrap();
        assert_eq!(one.truncation(), Some(int(7)));
        assert_eq!(one, S::from_ints(0, &[1], Some(7)));
    }

    #[test]
    fn rescale_and_twist() {
        let a = S::from_ints(-1, &[1, 744], Some(2));
        let r = a.rescale(&int(4));
        assert_eq!(r, S::from_terms([(int(-4), int(1)), (int(0), int(744))], Some(int(8))));
        assert_eq!(r.rescale(&rat(1, 4)), a);
        let tw = S::monomial(int(1), &int(1)).substitute(&int(1), &rat(1, 2));
        assert_eq!(tw.to_rational_series().unwrap(), S::monomial(int(-1), &int(1)));
    }

    #[test]
    fn evaluate_polynomial_and_precision_error() {
        let tau = BigFloatComplex::from_f64(0.0, 1.0, 30);
        let one = S::one();
        assert!(one.evaluate(&tau, 30).unwrap().dist(&BigFloatComplex::one(30)) < 1e-25);
        let short = S::from_ints(0, &[1, 1], Some(2));
        match short.evaluate(&tau, 30) {
            Err(Error::Precision(msg)) => assert!(msg.contains("need order")),
            other => panic!("expected a precision error, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let a = S::from_terms([(rat(-3, 4), int(1)), (rat(1, 4), rat(8, 3))], Some(rat(9, 4)));
        let v = a.to_json();
        assert_eq!(v["denom_lattice"], 4);
        assert_eq!(v["truncation"], "9/4");
        assert_eq!(S::from_json(&v).unwrap(), a);
        let exact = S::one().to_json();
        assert!(exact["truncation"].is_null());
        let bad = json!({"denom_lattice": 2, "truncation": "1", "terms": [["1/3", "1"]]});
        assert!(S::from_json(&bad).is_err());
    }

    #[test]
    fn domain_mismatch_is_reported() {
        use crate::qseries::quadratic::Quadratic;
        let a = QSeries::<Quadratic>::constant(Quadratic::sqrt(5));
        let b = QSeries::<Quadratic>::constant(Quadratic::sqrt(13));
        assert!(matches!(a.try_mul(&b), Err(Error::DomainMismatch(_))));
        assert!(a.try_mul(&a).is_ok());
    }
}
