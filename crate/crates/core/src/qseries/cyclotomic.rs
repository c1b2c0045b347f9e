//! Elements of cyclotomic fields `Q(zeta_n)`, `zeta_n = e(1/n)`.
//!
//! Elements are kept reduced modulo the `n`-th cyclotomic polynomial, so the
//! coefficient vector in the power basis `1, zeta, ..., zeta^(phi(n)-1)` is
//! canonical for a fixed order. Elements of different orders are compared and
//! combined in the field of the least common multiple.

use std::fmt;

use rug::Rational;

use crate::arith::{divisors, euler_phi, gcd, lcm_u, mobius};
use crate::qseries::rational::format_rational;

#[derive(Clone)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<Rational>,
}

/// Integer coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    let mut p = vec![1i64];
    let divs = divisors(n);
    for &d in &divs {
        if mobius(n / d) == 1 {
            let d = d as usize;
            let mut q = vec![0i64; p.len() + d];
            for (i, &c) in p.iter().enumerate() {
                q[i + d] += c;
                q[i] -= c;
            }
            p = q;
        }
    }
    for &d in &divs {
        if mobius(n / d) == -1 {
            // exact division by x^d - 1
            let d = d as usize;
            let deg = p.len() - 1;
            let mut q = vec![0i64; deg - d + 1];
            for k in (0..q.len()).rev() {
                let up = if k + d < q.len() { q[k + d] } else { 0 };
                q[k] = p[k + d] + up;
            }
            p = q;
        }
    }
    // Sign normalisation: the construction yields a monic polynomial up to sign.
    if *p.last().unwrap() < 0 {
        p.iter_mut().for_each(|c| *c = -*c);
    }
    p
}

fn reduce_full(order: u64, mut v: Vec<Rational>) -> Vec<Rational> {
    let phi = euler_phi(order) as usize;
    if v.len() <= phi {
        v.resize(phi, Rational::new());
        return v;
    }
    let poly = cyclotomic_poly(order);
    for i in (phi..v.len()).rev() {
        if v[i] == 0 {
            continue;
        }
        let c = std::mem::take(&mut v[i]);
        for (j, &pj) in poly.iter().enumerate().take(phi) {
            if pj != 0 {
                v[i - phi + j] -= Rational::from(&c * pj);
            }
        }
    }
    v.truncate(phi);
    v
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic { order: 1, coeffs: vec![Rational::new()] }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::from(1))
    }

    pub fn from_rational(r: Rational) -> Self {
        Cyclotomic { order: 1, coeffs: vec![r] }
    }

    /// Builds `sum_k c_k zeta_n^k` from an arbitrary exponent table.
    pub fn from_exponents<I>(order: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        assert!(order > 0, "cyclotomic order must be positive");
        let mut full = vec![Rational::new(); order as usize];
        for (k, c) in terms {
            full[k.rem_euclid(order as i64) as usize] += c;
        }
        Cyclotomic { order, coeffs: reduce_full(order, full) }
    }

    /// The root of unity `e(num/den)`.
    pub fn root_of_unity(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        Self::from_exponents(den as u64, [(num, Rational::from(1))])
    }

    /// `e(x)` for rational `x`.
    pub fn e(x: &Rational) -> Self {
        let num = x.numer().to_i64().expect("phase numerator too large");
        let den = x.denom().to_i64().expect("phase denominator too large");
        Self::root_of_unity(num.rem_euclid(den), den)
    }

    /// `sqrt(r)` for a nonnegative rational, realised through quadratic Gauss sums.
    pub fn sqrt_rational(r: &Rational) -> Self {
        assert!(*r >= 0, "square root of a negative rational");
        if *r == 0 {
            return Self::zero();
        }
        let num = r.numer().to_u64().expect("radicand too large");
        let den = r.denom().to_u64().expect("radicand too large");
        let (a, s) = crate::arith::square_part(num * den);
        let mut out = Self::from_rational(Rational::from((a, den)));
        for (p, _) in crate::arith::factorize(s) {
            out = out.mul(&sqrt_prime(p));
        }
        out
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coefficients in the reduced power basis.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn to_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| *c == 0) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-expresses the element in `Q(zeta_target)`; `target` must be a multiple of the order.
    pub fn lift(&self, target: u64) -> Self {
        assert!(target % self.order == 0, "cannot lift order {} to {}", self.order, target);
        if target == self.order {
            return self.clone();
        }
        let step = (target / self.order) as usize;
        let mut full = vec![Rational::new(); target as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                full[k * step] = c.clone();
            }
        }
        Cyclotomic { order: target, coeffs: reduce_full(target, full) }
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let l = lcm_u(self.order, other.order);
        (self.lift(l), other.lift(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.common(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (mut a, b) = self.common(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| Rational::from(c * r)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if let Some(r) = other.to_rational() {
            return self.scale(&r);
        }
        if let Some(r) = self.to_rational() {
            return other.scale(&r);
        }
        let (a, b) = self.common(other);
        let mut full = vec![Rational::new(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if *y != 0 {
                    full[i + j] += Rational::from(x * y);
                }
            }
        }
        Cyclotomic { order: a.order, coeffs: reduce_full(a.order, full) }
    }

    /// The Galois conjugate `zeta -> zeta^k` (`k` coprime to the order).
    pub fn galois(&self, k: i64) -> Self {
        Self::from_exponents(
            self.order,
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| (i as i64 * k, c.clone())),
        )
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Field norm down to `Q`.
    pub fn norm(&self) -> Rational {
        let n = self.order as i64;
        let mut acc = Self::one();
        for k in 1..n.max(2) {
            if gcd(k, n) == 1 {
                acc = acc.mul(&self.galois(k));
            }
        }
        acc.to_rational().expect("norm is rational")
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.to_rational() {
            return Some(Self::from_rational(r.recip()));
        }
        let n = self.order as i64;
        let mut others = Self::one();
        for k in 2..n {
            if gcd(k, n) == 1 {
                others = others.mul(&self.galois(k));
            }
        }
        let norm = self.mul(&others).to_rational().expect("norm is rational");
        Some(others.scale(&norm.recip()))
    }

    /// Numeric value `(re, im)` in double precision, for diagnostics.
    pub fn to_f64(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.order as f64;
            let c = c.to_f64();
            re += c * t.cos();
            im += c * t.sin();
        }
        (re, im)
    }

    /// Sparse exponent table `k -> c_k` for serialisation.
    pub fn exponent_table(&self) -> Vec<(u64, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| (k as u64, c.clone()))
            .collect()
    }
}

/// `sqrt(p)` for a prime `p`.
fn sqrt_prime(p: u64) -> Cyclotomic {
    if p == 2 {
        // zeta_8 + zeta_8^{-1}
        return Cyclotomic::from_exponents(8, [(1, Rational::from(1)), (-1, Rational::from(1))]);
    }
    let g = Cyclotomic::from_exponents(
        p,
        (1..p as i64).map(|a| (a, Rational::from(crate::arith::kronecker(a, p as i64)))),
    );
    if p % 4 == 1 {
        g
    } else {
        // g = i sqrt(p)
        g.mul(&Cyclotomic::root_of_unity(-1, 4))
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{}", format_rational(&r));
        }
        let mut first = true;
        for (k, c) in self.exponent_table() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_rational(&c))?,
                _ => write!(f, "{}*z{}^{}", format_rational(&c), self.order, k)?,
            }
        }
        Ok(())
    }
}
