//! Binary quadratic forms, genus characters, CM points and singular moduli,
//! twisted Heegner divisors, the replication identity for `J = j - 744`, and
//! the recovery of twisted coefficients from traces of singular moduli.

use std::fmt;

use once_cell::sync::Lazy;
use rug::{Float, Integer, Rational};

use crate::arith::{divisors, gcd, is_discriminant, is_fundamental};
use crate::error::{Error, Result};
use crate::qseries::{bits_for_digits, capital_j, BigFloatComplex, QSeries};

pub use crate::arith::kronecker;

/// Number of `q`-terms in the cached expansion of `J`.
pub const J_PREC: i64 = 120;

static J_SERIES: Lazy<QSeries> = Lazy::new(|| capital_j(J_PREC));

/// `[A, B, C] = A x^2 + B xy + C y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bqf {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Bqf {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Bqf { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn content(&self) -> i64 {
        gcd(gcd(self.a, self.b), self.c).abs()
    }

    /// The right action `Q(ax + by, cx + dy)` of `[[a, b], [c, d]]`.
    pub fn act(&self, g: [[i64; 2]; 2]) -> Bqf {
        let [[a, b], [c, d]] = g;
        Bqf {
            a: self.a * a * a + self.b * a * c + self.c * c * c,
            b: 2 * self.a * a * b + self.b * (a * d + b * c) + 2 * self.c * c * d,
            c: self.a * b * b + self.b * b * d + self.c * d * d,
        }
    }

    /// `|B| <= A <= C`, with `B >= 0` when `|B| = A` or `A = C`.
    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a && self.a <= self.c && (self.b >= 0 || (self.b.abs() != self.a && self.a != self.c))
    }

    /// The reduced form in the `SL_2(Z)`-orbit of a positive definite form.
    pub fn reduce(&self) -> Bqf {
        let mut q = *self;
        loop {
            if q.b.abs() > q.a {
                let k = (q.a - q.b).div_euclid(2 * q.a);
                q = q.act([[1, k], [0, 1]]);
            } else if q.a > q.c {
                q = q.act([[0, -1], [1, 0]]);
            } else {
                if q.b < 0 && (q.b.abs() == q.a || q.a == q.c) {
                    q.b = -q.b;
                }
                return q;
            }
        }
    }

    /// Order of the stabilizer in `PSL_2(Z)` of a reduced form.
    pub fn stabilizer_order(&self) -> u32 {
        let q = self.reduce();
        if q.b == 0 && q.a == q.c {
            2
        } else if q.a == q.b && q.b == q.c {
            3
        } else {
            1
        }
    }

    /// Whether the class is its own inverse, so that `j(alpha_Q)` is real.
    pub fn is_ambiguous(&self) -> bool {
        let q = self.reduce();
        q.b == 0 || q.a == q.b || q.a == q.c
    }
}

impl fmt::Display for Bqf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

fn check_negative_disc(d: i64) -> Result<()> {
    if d >= 0 || !is_discriminant(d) {
        return Err(Error::InvalidInput(format!("{d} is not a negative discriminant")));
    }
    Ok(())
}

/// One reduced form per `SL_2(Z)`-class of discriminant `d < 0`, including imprimitive forms.
pub fn reduce_forms(d: i64) -> Result<Vec<Bqf>> {
    check_negative_disc(d)?;
    let n = -d;
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            if (b * b + n) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b + n) / (4 * a);
            let q = Bqf::new(a, b, c);
            if c >= a && q.is_reduced() {
                out.push(q);
            }
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

/// `chi^(m)_(D1)(Q) = (D1'|A m')(D1''|C m'')` for `Q = [A m, B, C]`; zero if no
/// admissible factorization exists. Every admissible factorization must agree.
pub fn genus_character(m: i64, d1: i64, q: &Bqf) -> Result<i32> {
    if m < 1 {
        return Err(Error::InvalidInput(format!("index must be positive, got {m}")));
    }
    if d1 < 1 || !is_fundamental(d1) {
        return Err(Error::InvalidInput(format!("D1 = {d1} must be a positive fundamental discriminant")));
    }
    if q.a % m != 0 {
        return Err(Error::InvalidInput(format!("{q} has A not divisible by {m}")));
    }
    let disc = q.discriminant();
    if disc % d1 != 0 || !is_discriminant(disc / d1) {
        return Err(Error::InvalidInput(format!("{disc}/{d1} is not a discriminant")));
    }
    let am = q.a / m;
    if gcd(gcd(am, q.b), gcd(q.c, d1)).abs() != 1 {
        return Ok(0);
    }
    let mut value: Option<i32> = None;
    for dd in divisors(d1 as u64) {
        for s in [1, -1] {
            let d1p = s * dd as i64;
            if d1 % d1p != 0 || !is_discriminant(d1p) || !is_discriminant(d1 / d1p) {
                continue;
            }
            let d1pp = d1 / d1p;
            for mp in divisors(m as u64) {
                let mp = mp as i64;
                let mpp = m / mp;
                if gcd(d1p, am * mp).abs() != 1 || gcd(d1pp, q.c * mpp).abs() != 1 {
                    continue;
                }
                let v = kronecker(d1p, am * mp) * kronecker(d1pp, q.c * mpp);
                match value {
                    None => value = Some(v),
                    Some(w) if w != v => {
                        return Err(Error::Consistency(format!("genus character of {q} depends on the factorization")));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(value.unwrap_or(0))
}

/// A point `x + i sqrt(y2)` of the upper half-plane with rational `x` and `y2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPoint {
    pub re: Rational,
    pub im_sq: Rational,
}

impl QuadPoint {
    pub fn new(re: Rational, im_sq: Rational) -> Result<Self> {
        if im_sq <= 0 {
            return Err(Error::InvalidInput("point must lie in the upper half-plane".into()));
        }
        Ok(QuadPoint { re, im_sq })
    }

    /// `(a z + b) / d`.
    pub fn hecke(&self, a: i64, b: i64, d: i64) -> QuadPoint {
        QuadPoint {
            re: (Rational::from(&self.re * a) + b) / d,
            im_sq: Rational::from(&self.im_sq * (a * a)) / (d * d),
        }
    }

    /// `g^-1 z` for `g` in `SL_2(Z)`.
    pub fn act_inverse(&self, g: [[i64; 2]; 2]) -> QuadPoint {
        let [[a, b], [c, d]] = g;
        let (a, b, c, d) = (d, -b, -c, a);
        let cx = Rational::from(&self.re * c) + d;
        let denom = Rational::from(&cx * &cx) + Rational::from(&self.im_sq * (c * c));
        let ax = Rational::from(&self.re * a) + b;
        let re = (ax * cx + Rational::from(&self.im_sq * (a * c))) / &denom;
        let im_sq = Rational::from(&self.im_sq / &denom) / &denom;
        QuadPoint { re, im_sq }
    }

    /// The `SL_2(Z)`-equivalent point in the standard fundamental domain.
    pub fn reduce(&self) -> QuadPoint {
        let half = Rational::from((1, 2));
        let mut p = self.clone();
        loop {
            let n = Rational::from(&p.re + &half).floor();
            p.re -= n;
            let norm = Rational::from(&p.re * &p.re) + &p.im_sq;
            if norm < 1 {
                p.re = Rational::from(-&p.re) / &norm;
                p.im_sq = Rational::from(&p.im_sq / &norm) / &norm;
            } else {
                if norm == 1 && p.re > 0 {
                    p.re = -p.re;
                }
                return p;
            }
        }
    }

    /// Whether `j` takes a real value here: the reduced point lies on the
    /// boundary of the fundamental domain or on the imaginary axis.
    pub fn on_real_locus(&self) -> bool {
        let p = self.reduce();
        let norm = Rational::from(&p.re * &p.re) + &p.im_sq;
        p.re == 0 || p.re == Rational::from((-1, 2)) || norm == 1
    }

    pub fn to_complex(&self, digits: u32) -> BigFloatComplex {
        BigFloatComplex::from_quadratic_point(&self.re, &self.im_sq, digits)
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + i*sqrt({})", self.re, self.im_sq)
    }
}

/// The root `(-B + i sqrt|D|) / 2A` of `Q(alpha, 1) = 0` in the upper half-plane.
pub fn cm_point(q: &Bqf) -> Result<QuadPoint> {
    let d = q.discriminant();
    if d >= 0 || q.a <= 0 {
        return Err(Error::InvalidInput(format!("{q} is not positive definite")));
    }
    QuadPoint::new(Rational::from((-q.b, 2 * q.a)), Rational::from((-d, 4 * q.a * q.a)))
}

fn j_series(digits: u32) -> Result<&'static QSeries> {
    let _ = digits;
    Ok(&J_SERIES)
}

/// `j(tau)`, after moving `tau` into the fundamental domain numerically.
pub fn j_at(tau: &BigFloatComplex, digits: u32) -> Result<BigFloatComplex> {
    if *tau.im() <= 0 {
        return Err(Error::InvalidInput("j needs a point of the upper half-plane".into()));
    }
    let bits = bits_for_digits(digits);
    let mut re = Float::with_val(bits, tau.re());
    let mut im = Float::with_val(bits, tau.im());
    for _ in 0..10_000 {
        let n = Float::with_val(bits, &re).round();
        re -= n;
        let norm = Float::with_val(bits, &re * &re) + Float::with_val(bits, &im * &im);
        if norm >= 1 {
            break;
        }
        re = Float::with_val(bits, -&re) / &norm;
        im = Float::with_val(bits, &im / &norm);
    }
    let z = BigFloatComplex::new(re, im, digits);
    let j = j_series(digits)?.evaluate(&z, digits)?;
    Ok(j.add(&BigFloatComplex::from_rational(&Rational::from(744), digits)))
}

/// `J(z) = j(z) - 744` at a point with exact quadratic data, reduced exactly.
/// On the real locus the imaginary residue is checked against `10^-(digits - 5)`.
pub fn capital_j_at(p: &QuadPoint, digits: u32) -> Result<BigFloatComplex> {
    let r = p.reduce();
    let v = j_series(digits)?.evaluate(&r.to_complex(digits), digits)?;
    if r.on_real_locus() {
        let scale = v.abs().to_f64().max(1.0);
        if v.im().to_f64().abs() > scale * 10f64.powi(-(digits as i32 - 5)) {
            return Err(Error::Precision(format!("J at {p} has imaginary residue {}", v.im().to_f64())));
        }
    }
    Ok(v)
}

/// `j` at the CM point of `q`.
pub fn j_at_cm(q: &Bqf, digits: u32) -> Result<BigFloatComplex> {
    let v = capital_j_at(&cm_point(q)?, digits)?;
    Ok(v.add(&BigFloatComplex::from_rational(&Rational::from(744), digits)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeegnerPoint {
    pub form: Bqf,
    pub point: QuadPoint,
    pub weight: Rational,
}

/// A formal sum of CM points on `X_0(1)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeegnerDivisor {
    pub points: Vec<HeegnerPoint>,
}

impl HeegnerDivisor {
    pub fn total_weight(&self) -> Rational {
        self.points.iter().map(|p| p.weight.clone()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One singular term `C(D, r) = mult` of `W`, contributing `mult * Z_(D1,r1)(D, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorTerm {
    pub d: i64,
    pub r: i64,
    pub mult: i64,
}

fn check_twist(d1: i64, r1: i64) -> Result<()> {
    if d1 <= 1 || !is_fundamental(d1) {
        return Err(Error::InvalidInput(format!("D1 = {d1} must be a fundamental discriminant > 1")));
    }
    if (d1 - r1 * r1).rem_euclid(4) != 0 {
        return Err(Error::InvalidInput(format!("D1 = {d1} is not r1^2 mod 4 for r1 = {r1}")));
    }
    Ok(())
}

/// `mult * sum_(Q in Q_(D D1, r r1) / SL_2(Z)) chi_(D1)(Q) alpha_Q / |stab Q|` for `m = 1`.
pub fn twisted_divisor(m: i64, d1: i64, r1: i64, d: i64, r: i64, mult: i64) -> Result<HeegnerDivisor> {
    if m != 1 {
        return Err(Error::Unsupported(format!("Heegner divisors are implemented for m = 1 only, got {m}")));
    }
    check_twist(d1, r1)?;
    check_negative_disc(d)?;
    if (d - r * r).rem_euclid(4) != 0 {
        return Err(Error::InvalidInput(format!("D = {d} is not r^2 mod 4 for r = {r}")));
    }
    if mult == 0 {
        return Ok(HeegnerDivisor::default());
    }
    let parity = (r * r1).rem_euclid(2);
    let mut points = Vec::new();
    for q in reduce_forms(d * d1)? {
        if q.b.rem_euclid(2) != parity {
            continue;
        }
        let chi = genus_character(1, d1, &q)?;
        if chi == 0 {
            continue;
        }
        let weight = Rational::from((mult * chi as i64, q.stabilizer_order() as i64));
        points.push(HeegnerPoint { form: q, point: cm_point(&q)?, weight });
    }
    Ok(HeegnerDivisor { points })
}

/// A real number with an absolute error bound.
#[derive(Debug, Clone)]
pub struct NumericValue {
    pub value: Float,
    pub bound: f64,
    pub digits: u32,
}

impl NumericValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn to_decimal(&self) -> String {
        crate::qseries::format_float(&self.value, self.digits)
    }
}

fn tolerance(digits: u32) -> f64 {
    10f64.powi(-(digits as i32 - 10))
}

fn divisor_of(d1: i64, r1: i64, spec: &[DivisorTerm]) -> Result<HeegnerDivisor> {
    let mut all = HeegnerDivisor::default();
    for t in spec {
        all.points.extend(twisted_divisor(1, d1, r1, t.d, t.r, t.mult)?.points);
    }
    Ok(all)
}

fn sqrt_of(n: i64, digits: u32) -> Float {
    Float::with_val(bits_for_digits(digits), n).sqrt()
}

fn real_part(z: &BigFloatComplex, what: &str, digits: u32) -> Result<Float> {
    let scale = z.abs().to_f64().max(1.0);
    if z.im().to_f64().abs() > scale * tolerance(digits) {
        return Err(Error::Precision(format!("{what} has imaginary part {}", z.im().to_f64())));
    }
    Ok(z.re().clone())
}

/// `(1/sqrt(D1)) sum_Q weight(Q) J(alpha_Q)` over the twisted divisor of `spec`.
pub fn trace_singular_moduli(d1: i64, r1: i64, spec: &[DivisorTerm], digits: u32) -> Result<NumericValue> {
    check_twist(d1, r1)?;
    let div = divisor_of(d1, r1, spec)?;
    let mut acc = BigFloatComplex::zero(digits);
    let mut wsum = 0.0;
    for p in &div.points {
        acc = acc.add(&capital_j_at(&p.point, digits)?.scale_rational(&p.weight));
        wsum += p.weight.to_f64().abs();
    }
    let re = real_part(&acc, "trace of singular moduli", digits)?;
    let value = re / sqrt_of(d1, digits);
    Ok(NumericValue { value, bound: wsum.max(1.0) * tolerance(digits), digits })
}

/// `sum_(ad = n) sum_(b mod d) J((a z + b) / d)`.
fn hecke_sum(p: &QuadPoint, n: i64, digits: u32) -> Result<BigFloatComplex> {
    let mut acc = BigFloatComplex::zero(digits);
    for d in divisors(n as u64) {
        let d = d as i64;
        let a = n / d;
        for b in 0..d {
            acc = acc.add(&capital_j_at(&p.hecke(a, b, d), digits)?);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct ReplicationRow {
    pub order: i64,
    pub lhs: BigFloatComplex,
    pub rhs: BigFloatComplex,
    pub error: f64,
}

/// Coefficientwise comparison of `J(tau) - J(alpha)` with
/// `q^-1 exp(-sum_n sum_(ad=n) sum_(b mod d) J((a alpha + b)/d) q^n / n)`.
#[derive(Debug, Clone)]
pub struct ReplicationReport {
    pub form: Bqf,
    pub rows: Vec<ReplicationRow>,
    pub tolerance: f64,
    pub first_failure: Option<i64>,
}

impl ReplicationReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks the replication identity at `alpha_Q` for the orders `q^-1, ..., q^prec`.
pub fn replication_check(q: &Bqf, prec: i64, digits: u32) -> Result<ReplicationReport> {
    let alpha = cm_point(q)?;
    let jalpha = capital_j_at(&alpha, digits)?;
    let n_terms = (prec + 2) as usize;
    let mut logc = vec![BigFloatComplex::zero(digits); n_terms];
    for n in 1..n_terms as i64 {
        let s = hecke_sum(&alpha, n, digits)?;
        logc[n as usize] = s.scale_rational(&Rational::from((-1, n)));
    }
    let mut e = vec![BigFloatComplex::zero(digits); n_terms];
    e[0] = BigFloatComplex::one(digits);
    for k in 1..n_terms {
        let mut s = BigFloatComplex::zero(digits);
        for j in 1..=k {
            s = s.add(&logc[j].scale_rational(&Rational::from(j as i64)).mul(&e[k - j]));
        }
        e[k] = s.scale_rational(&Rational::from((1, k as i64)));
    }
    let tol = tolerance(digits);
    let mut rows = Vec::new();
    let mut first_failure = None;
    for (k, rhs) in e.into_iter().enumerate() {
        let order = k as i64 - 1;
        let mut lhs = BigFloatComplex::from_rational(&J_SERIES.coeff_int(order), digits);
        if order == 0 {
            lhs = lhs.sub(&jalpha);
        }
        let err = lhs.dist(&rhs);
        let scale = lhs.abs().to_f64().max(1.0);
        if err > tol * scale && first_failure.is_none() {
            first_failure = Some(order);
        }
        rows.push(ReplicationRow { order, lhs, rhs, error: err });
    }
    Ok(ReplicationReport { form: *q, rows, tolerance: tol, first_failure })
}

#[derive(Debug, Clone)]
pub struct InvertedCoefficient {
    pub n: i64,
    pub value: Integer,
    pub approx: Float,
    pub residue: f64,
}

/// Recovers `C(D1 n^2, r1 n)` for `n = 1..=nmax` from
/// `sqrt(D1) sum_(ad = n) a (D1|d) C(D1 a^2, r1 a) = sum_Q w_Q sum_(ad = n) sum_(b mod d) J((a alpha_Q + b)/d)`.
pub fn invert_coefficients(
    d1: i64,
    r1: i64,
    spec: &[DivisorTerm],
    nmax: i64,
    digits: u32,
) -> Result<Vec<InvertedCoefficient>> {
    check_twist(d1, r1)?;
    let div = divisor_of(d1, r1, spec)?;
    let bits = bits_for_digits(digits);
    let sqrt_d1 = sqrt_of(d1, digits);
    let mut out: Vec<InvertedCoefficient> = Vec::new();
    for n in 1..=nmax {
        let mut acc = BigFloatComplex::zero(digits);
        for p in &div.points {
            acc = acc.add(&hecke_sum(&p.point, n, digits)?.scale_rational(&p.weight));
        }
        let rhs = real_part(&acc, "Hecke-translated trace", digits)?;
        let mut x = Float::with_val(bits, &rhs / &sqrt_d1);
        for a in 1..n {
            if n % a != 0 {
                continue;
            }
            let chi = kronecker(d1, n / a) as i64;
            x -= Float::with_val(bits, &out[(a - 1) as usize].value) * (a * chi);
        }
        x /= n;
        let rounded = Float::with_val(bits, x.round_ref());
        let residue = Float::with_val(bits, &x - &rounded).abs().to_f64();
        if residue > 1e-3 {
            return Err(Error::UntrustedInversion { n, residue: format!("{residue:.3e}") });
        }
        let value = rounded.to_integer().expect("finite value");
        out.push(InvertedCoefficient { n, value, approx: x, residue });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::kronecker;

    fn f(a: i64, b: i64, c: i64) -> Bqf {
        Bqf::new(a, b, c)
    }

    #[test]
    fn kronecker_values() {
        for a in 1..20 {
            assert_eq!(kronecker(1, a), 1);
        }
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(5, 3), -1);
        assert_eq!(kronecker(5, 4), 1);
    }

    #[test]
    fn reduced_forms() {
        assert_eq!(reduce_forms(-3).unwrap(), vec![f(1, 1, 1)]);
        assert_eq!(reduce_forms(-4).unwrap(), vec![f(1, 0, 1)]);
        assert_eq!(reduce_forms(-15).unwrap(), vec![f(1, 1, 4), f(2, 1, 2)]);
        assert_eq!(reduce_forms(-23).unwrap().len(), 3);
        assert!(reduce_forms(-5).is_err());
        assert_eq!(f(4, 5, 3).reduce(), f(2, -1, 3));
    }

    #[test]
    fn class_counts_match_hurwitz() {
        for n in 1..=400i64 {
            let d = -n;
            if !is_discriminant(d) {
                continue;
            }
            let forms = reduce_forms(d).unwrap();
            let total: Rational = forms.iter().map(|q| Rational::from((1, q.stabilizer_order() as i64))).sum();
            assert_eq!(total, crate::borcherds::hurwitz(n as u64), "D = {d}");
            let mut orbits = std::collections::BTreeSet::new();
            let gens = [[[1, 1], [0, 1]], [[0, -1], [1, 0]], [[2, 1], [1, 1]]];
            for q in &forms {
                for g in gens {
                    orbits.insert(q.act(g).reduce());
                }
            }
            assert_eq!(orbits.into_iter().collect::<Vec<_>>(), forms);
        }
    }

    #[test]
    fn genus_characters() {
        assert_eq!(genus_character(1, 5, &f(1, 1, 4)).unwrap(), 1);
        assert_eq!(genus_character(1, 5, &f(2, 1, 2)).unwrap(), -1);
        let g = [[2, 1], [3, 2]];
        for q in reduce_forms(-15).unwrap() {
            assert_eq!(genus_character(1, 5, &q.act(g)).unwrap(), genus_character(1, 5, &q).unwrap());
        }
    }

    #[test]
    fn cm_points_and_j() {
        assert_eq!(cm_point(&f(1, 0, 1)).unwrap(), QuadPoint { re: Rational::new(), im_sq: Rational::from(1) });
        assert_eq!(cm_point(&f(2, 1, 2)).unwrap(), QuadPoint { re: Rational::from((-1, 4)), im_sq: Rational::from((15, 16)) });
        let j = |q: Bqf| j_at_cm(&q, 40).unwrap();
        assert!(j(f(1, 0, 1)).dist(&BigFloatComplex::from_rational(&Rational::from(1728), 40)) < 1e-25);
        assert!(j(f(1, 1, 1)).abs().to_f64() < 1e-25);
        assert!(j(f(1, 1, 2)).dist(&BigFloatComplex::from_rational(&Rational::from(-3375), 40)) < 1e-25);
        let tau = cm_point(&f(1, 1, 2)).unwrap().hecke(1, 5, 1).to_complex(40);
        assert!(j_at(&tau, 40).unwrap().dist(&BigFloatComplex::from_rational(&Rational::from(-3375), 40)) < 1e-25);
    }

    #[test]
    fn equivariance() {
        let q = f(2, 1, 3);
        let g = [[1, 2], [1, 3]];
        let lhs = cm_point(&q.act(g)).unwrap();
        let rhs = cm_point(&q).unwrap().act_inverse(g);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn divisors_and_traces() {
        let div = twisted_divisor(1, 5, 1, -3, 1, 3).unwrap();
        let w: Vec<_> = div.points.iter().map(|p| (p.form, p.weight.clone())).collect();
        assert_eq!(w, vec![(f(1, 1, 4), Rational::from(3)), (f(2, 1, 2), Rational::from(-3))]);
        assert_eq!(div.total_weight(), 0);
        assert!(twisted_divisor(1, 5, 1, -3, 1, 0).unwrap().is_empty());
        assert!(matches!(twisted_divisor(2, 5, 1, -3, 1, 1), Err(Error::Unsupported(_))));
        let t = trace_singular_moduli(5, 1, &[DivisorTerm { d: -3, r: 1, mult: 3 }], 60).unwrap();
        assert!((t.to_f64() + 257985.0).abs() < 1e-6);
        assert_eq!(trace_singular_moduli(5, 1, &[], 60).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn replication() {
        for q in [f(1, 0, 1), f(1, 1, 1), f(1, 1, 2)] {
            let r = replication_check(&q, 5, 40).unwrap();
            assert!(r.passed(), "{q}: {:?}", r.first_failure);
        }
    }

    #[test]
    fn inversion() {
        let spec = [DivisorTerm { d: -3, r: 1, mult: 3 }];
        let c = invert_coefficients(5, 1, &spec, 2, 60).unwrap();
        assert_eq!(c[0].value, -257985);
        assert!(invert_coefficients(5, 1, &[], 2, 60).unwrap().iter().all(|x| x.value == 0));
    }
}
