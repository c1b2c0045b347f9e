//! Vector-valued forms for the Weil representation of index `m`, the fold
//! between index-one forms and the Kohnen plus space, and the plus-space basis.

use std::collections::BTreeMap;

use rug::Rational;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::qseries::rational::{frac, is_integer, to_i64};
use crate::qseries::{hauptmodul_t4, jacobi_theta, level4_u, Coefficient, QSeries};

/// Components `F_r`, `r mod 2|m|`, of a form for the Weil representation `rho_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValuedForm<C: Coefficient = Rational> {
    m: i64,
    level: u64,
    components: Vec<QSeries<C>>,
}

impl<C: Coefficient> VectorValuedForm<C> {
    /// Validates support (`F_r` has exponents in `r^2/4m + Z`) and the symmetry
    /// `F_(-r) = sgn(m) F_r`. Missing components are zero.
    pub fn new(m: i64, level: u64, components: BTreeMap<i64, QSeries<C>>) -> Result<Self> {
        if m == 0 || level == 0 {
            return Err(Error::InvalidInput("index must be nonzero and level positive".into()));
        }
        let two_m = 2 * m.abs();
        let mut comps = vec![QSeries::zero(); two_m as usize];
        for (r, s) in components {
            comps[r.rem_euclid(two_m) as usize] = s;
        }
        let f = VectorValuedForm { m, level, components: comps };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        let two_m = 2 * self.m.abs();
        for r in 0..two_m {
            let shift = Rational::from((r * r, 4 * self.m));
            let comp = &self.components[r as usize];
            for (e, _) in comp.terms() {
                if !is_integer(&Rational::from(&e - &shift)) {
                    return Err(Error::InvalidInput(format!(
                        "component {r} has exponent {e}, expected {} mod 1",
                        frac(&shift)
                    )));
                }
            }
            let partner = &self.components[((two_m - r) % two_m) as usize];
            let want = if self.m > 0 { comp.clone() } else { comp.neg() };
            if !agree_common(partner, &want) {
                return Err(Error::InvalidInput(format!(
                    "symmetry F_(-r) = sgn(m) F_r fails at r = {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn index(&self) -> i64 {
        self.m
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn component(&self, r: i64) -> &QSeries<C> {
        &self.components[r.rem_euclid(2 * self.m.abs()) as usize]
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, &QSeries<C>)> {
        self.components.iter().enumerate().map(|(r, s)| (r as i64, s))
    }

    /// `C_F(D, r)`: the coefficient of `q^(D/4m)` in `F_r`.
    pub fn coeff(&self, d: &Rational, r: i64) -> C {
        self.component(r).coeff(&Rational::from(d / (4 * self.m)))
    }

    /// Like [`coeff`](Self::coeff) but `None` beyond the truncation order.
    pub fn get(&self, d: &Rational, r: i64) -> Option<C> {
        self.component(r).get(&Rational::from(d / (4 * self.m)))
    }

    /// Smallest truncation order over all components, in `q`.
    pub fn truncation(&self) -> Option<Rational> {
        self.components.iter().filter_map(QSeries::truncation).min()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(QSeries::is_zero)
    }

    pub fn zero(m: i64, level: u64) -> Self {
        VectorValuedForm { m, level, components: vec![QSeries::zero(); 2 * m.unsigned_abs() as usize] }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a.add(b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a.sub(b)))
    }

    pub fn scale_by(&self, c: &C) -> Self {
        self.map(|s| s.scale_by(c))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.map(|s| s.scale(r))
    }

    pub fn truncate(&self, t: &Rational) -> Self {
        self.map(|s| s.truncate(t))
    }

    pub fn with_level(&self, level: u64) -> Self {
        VectorValuedForm { level, ..self.clone() }
    }

    /// Applies a map to every component; the result keeps index and level.
    pub fn map<D: Coefficient, F: Fn(&QSeries<C>) -> QSeries<D>>(&self, f: F) -> VectorValuedForm<D> {
        VectorValuedForm { m: self.m, level: self.level, components: self.components.iter().map(f).collect() }
    }

    fn zip<F: Fn(&QSeries<C>, &QSeries<C>) -> QSeries<C>>(&self, other: &Self, f: F) -> Self {
        VectorValuedForm {
            m: self.m,
            level: self.level,
            components: self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::InvalidInput(format!("indices {} and {} differ", self.m, other.m)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let comps: Map<String, Value> =
            self.components().map(|(r, s)| (r.to_string(), s.to_json())).collect();
        json!({ "index": self.m, "level": self.level, "components": comps })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let m = v
            .get("index")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Json("form needs an integer \"index\"".into()))?;
        let level = v.get("level").map_or(Some(1), Value::as_u64).ok_or_else(|| Error::Json("bad \"level\"".into()))?;
        let raw = v
            .get("components")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("form needs a \"components\" object".into()))?;
        let mut comps = BTreeMap::new();
        for (r, s) in raw {
            let r: i64 = r.parse().map_err(|_| Error::Json(format!("bad component label {r:?}")))?;
            comps.insert(r, QSeries::from_json(s)?);
        }
        Self::new(m, level, comps)
    }
}

/// Equality on the range where both series are known.
fn agree_common<C: Coefficient>(a: &QSeries<C>, b: &QSeries<C>) -> bool {
    match (a.truncation(), b.truncation()) {
        (None, None) => a == b,
        (Some(t), None) | (None, Some(t)) => a.truncate(&t) == b.truncate(&t),
        (Some(s), Some(t)) => {
            let t = s.min(t);
            a.truncate(&t) == b.truncate(&t)
        }
    }
}

/// `F_0(4 tau) + F_1(4 tau)` for an index-one form.
pub fn kohnen_fold<C: Coefficient>(f: &VectorValuedForm<C>) -> Result<QSeries<C>> {
    if f.index() != 1 {
        return Err(Error::Unsupported(format!("fold needs index 1, got {}", f.index())));
    }
    let four = Rational::from(4);
    Ok(f.component(0).rescale(&four).add(&f.component(1).rescale(&four)).normalized())
}

/// Splits a plus-space series into the index-one components `(F_0, F_1)`.
pub fn kohnen_unfold<C: Coefficient>(f: &QSeries<C>) -> Result<VectorValuedForm<C>> {
    let mut parts: [Vec<(Rational, C)>; 2] = [Vec::new(), Vec::new()];
    for (e, c) in f.terms() {
        if !is_integer(&e) {
            return Err(Error::InvalidInput(format!("exponent {e} is not an integer")));
        }
        let n = to_i64(&e);
        match n.rem_euclid(4) {
            r @ (0 | 1) => parts[r as usize].push((Rational::from((n, 4)), c.clone())),
            _ => return Err(Error::PlusSupport(n.to_string())),
        }
    }
    let trunc = f.truncation().map(|t| t / 4);
    let [p0, p1] = parts;
    let comps = BTreeMap::from([
        (0, QSeries::from_terms(p0, trunc.clone())),
        (1, QSeries::from_terms(p1, trunc)),
    ]);
    VectorValuedForm::new(1, 4, comps)
}

/// An element `f_D = q^(-D) + O(q)` of the weight 1/2 plus space (`f_0 = theta`).
#[derive(Debug, Clone, PartialEq)]
pub struct PlusForm {
    pub d: i64,
    pub series: QSeries,
}

impl PlusForm {
    pub fn new(d: i64, series: QSeries) -> Result<Self> {
        check_plus_support(&series)?;
        Ok(PlusForm { d, series })
    }

    pub fn coeff(&self, n: i64) -> Rational {
        self.series.coeff_int(n)
    }

    pub fn unfold(&self) -> Result<VectorValuedForm> {
        kohnen_unfold(&self.series)
    }

    pub fn to_json(&self) -> Value {
        json!({ "D": self.d, "series": self.series.to_json() })
    }
}

fn check_plus_support(s: &QSeries) -> Result<()> {
    for (e, _) in s.terms() {
        if !is_integer(&e) {
            return Err(Error::InvalidInput(format!("exponent {e} is not an integer")));
        }
        let n = to_i64(&e);
        if matches!(n.rem_euclid(4), 2 | 3) {
            return Err(Error::PlusSupport(n.to_string()));
        }
    }
    Ok(())
}

const MAX_RETRIES: usize = 4;

/// The echelon family `f_D`, `D in {0, 3, 4, 7, 8, ...}`, `D <= dmax`, known below `q^prec`.
///
/// Each `f_D` is found as `theta * g` with `g` a Laurent polynomial in the level
/// four hauptmodul `t_4` plus a polynomial without constant term in `u = 1/(t_4 + 16)`,
/// i.e. a function with poles only at the three cusps of `Gamma_0(4)`.
/// The coefficients come from an exact solve that kills the residues 2, 3 mod 4
/// up to a window and fixes the principal part; the result is then checked up
/// to `prec` and the solve is repeated with a larger space if needed.
pub fn plus_basis(dmax: i64, prec: i64) -> Result<Vec<PlusForm>> {
    if dmax < 0 {
        return Err(Error::InvalidInput(format!("dmax must be nonnegative, got {dmax}")));
    }
    if prec < 1 {
        return Err(Error::Precision(format!("plus basis needs prec >= 1, got {prec}")));
    }
    let mut b = (dmax + 3) / 4 + 2;
    let mut window = 4 * dmax + 40;
    for _ in 0..MAX_RETRIES {
        if let Some(basis) = try_plus_basis(dmax, prec, b, window) {
            return Ok(basis);
        }
        b += 2;
        window += 40;
    }
    Err(Error::Precision(format!(
        "plus basis solve for dmax = {dmax} did not verify up to q^{prec}"
    )))
}

/// The single element `f_D`.
pub fn plus_form(d: i64, prec: i64) -> Result<PlusForm> {
    if d < 0 || !matches!(d.rem_euclid(4), 0 | 3) {
        return Err(Error::NoSuchBasisElement(d));
    }
    plus_basis(d, prec)?
        .into_iter()
        .find(|f| f.d == d)
        .ok_or(Error::NoSuchBasisElement(d))
}

/// `f_3 = q^-3 - 248 q + 26752 q^4 - ...`.
pub fn f0(prec: i64) -> Result<PlusForm> {
    plus_form(3, prec)
}

fn try_plus_basis(dmax: i64, prec: i64, b: i64, window: i64) -> Option<Vec<PlusForm>> {
    let top = window.max(prec);
    let theta = jacobi_theta(top + dmax + 1);
    let t4 = hauptmodul_t4(top + dmax + 1);
    let u = level4_u(top + 1);

    let mut gens = Vec::new();
    let mut cur = theta.clone();
    gens.push(cur.clone());
    for _ in 1..=dmax {
        cur = cur.mul(&t4);
        gens.push(cur.clone());
    }
    let mut cur = theta.clone();
    for _ in 1..=b {
        cur = cur.mul(&u);
        gens.push(cur.clone());
    }
    let t4_inv = t4.inv().expect("t_4 is invertible");
    let mut cur = theta;
    for _ in 1..=b {
        cur = cur.mul(&t4_inv);
        gens.push(cur.clone());
    }
    let gens: Vec<QSeries> = gens.into_iter().map(|g| g.truncate_int(top + 1)).collect();
    for g in &gens {
        debug_assert!(g.truncation().map_or(false, |t| t > top));
    }

    let targets: Vec<i64> = (0..=dmax).filter(|d| matches!(d % 4, 0 | 3)).collect();
    let mut rows: Vec<(i64, Vec<Rational>)> = Vec::new();
    for n in -dmax..=window {
        if n <= 0 || matches!(n.rem_euclid(4), 2 | 3) {
            rows.push((n, gens.iter().map(|g| g.coeff_int(n)).collect()));
        }
    }
    let rhs: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(n, _)| targets.iter().map(|&d| Rational::from((*n == -d) as i64)).collect())
        .collect();
    let matrix: Vec<Vec<Rational>> = rows.into_iter().map(|(_, r)| r).collect();
    let sols = solve_exact(matrix, rhs)?;

    let mut out = Vec::with_capacity(targets.len());
    for (k, &d) in targets.iter().enumerate() {
        let mut f = QSeries::big_o(&Rational::from(prec));
        for (g, x) in gens.iter().zip(&sols) {
            if x[k] != 0 {
                f = f.add(&g.truncate_int(prec).scale(&x[k]));
            }
        }
        let form = PlusForm::new(d, f).ok()?;
        out.push(form);
    }
    Some(out)
}

/// Solves `A X = B` exactly for a consistent system, choosing free variables
/// as zero; `None` if inconsistent.
fn solve_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let nrhs = b.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].clone().recip();
        for x in a[r].iter_mut().chain(b[r].iter_mut()) {
            *x *= &inv;
        }
        for i in 0..rows {
            if i == r || a[i][c] == 0 {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                let t = Rational::from(&f * &a[r][j]);
                a[i][j] -= t;
            }
            for j in 0..nrhs {
                let t = Rational::from(&f * &b[r][j]);
                b[i][j] -= t;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|row| row.iter().any(|x| *x != 0)) {
        return None;
    }
    let mut x = vec![vec![Rational::new(); nrhs]; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::{int, rat};
    use crate::qseries::theta_nullwert;

    fn theta_pair(prec: i64) -> VectorValuedForm {
        let p = int(prec);
        VectorValuedForm::new(
            1,
            4,
            BTreeMap::from([(0, theta_nullwert(1, 0, &p)), (1, theta_nullwert(1, 1, &p))]),
        )
        .unwrap()
    }

    #[test]
    fn fold_theta() {
        let th = kohnen_fold(&theta_pair(10)).unwrap();
        assert_eq!(th, jacobi_theta(40));
        assert_eq!(kohnen_unfold(&th).unwrap(), theta_pair(10));
        assert!(kohnen_fold(&VectorValuedForm::<Rational>::zero(1, 1)).unwrap().is_zero());
    }

    #[test]
    fn unfold_rejects_off_support() {
        let q2: QSeries = QSeries::monomial(int(1), &int(2));
        assert!(matches!(kohnen_unfold(&q2), Err(Error::PlusSupport(_))));
        let z = VectorValuedForm::<Rational>::zero(2, 1);
        assert!(matches!(kohnen_fold(&z), Err(Error::Unsupported(_))));
    }

    #[test]
    fn constructor_checks() {
        let bad_support = BTreeMap::from([(1, QSeries::monomial(int(1), &int(0)))]);
        assert!(VectorValuedForm::<Rational>::new(1, 1, bad_support).is_err());
        // m = 2: F_1 needs exponents in 1/8 + Z and F_3 = F_1
        let f1: QSeries = QSeries::monomial(int(1), &rat(1, 8));
        let lopsided = BTreeMap::from([(1, f1.clone())]);
        assert!(VectorValuedForm::new(2, 1, lopsided).is_err());
        let ok = BTreeMap::from([(1, f1.clone()), (3, f1.clone())]);
        assert!(VectorValuedForm::new(2, 1, ok).is_ok());
        let anti = BTreeMap::from([(1, f1.clone()), (3, f1.neg())]);
        let neg_m: QSeries = QSeries::monomial(int(1), &rat(-1, 8));
        assert!(VectorValuedForm::new(-2, 1, anti).is_err());
        let anti = BTreeMap::from([(1, neg_m.clone()), (3, neg_m.neg())]);
        assert!(VectorValuedForm::new(-2, 1, anti).is_ok());
        let f = VectorValuedForm::new(2, 1, BTreeMap::from([(1, f1.clone()), (3, f1)])).unwrap();
        assert_eq!(f.coeff(&int(1), 1), 1);
        assert_eq!(f.coeff(&int(1), 3), 1);
        assert_eq!(VectorValuedForm::<Rational>::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn f3_anchors() {
        let f = f0(12).unwrap();
        let want = [(-3, 1i64), (0, 0), (1, -248), (4, 26752), (5, -85995), (8, 1707264), (9, -4096248)];
        for (n, c) in want {
            assert_eq!(f.coeff(n), c, "q^{n}");
        }
        let unf = f.unfold().unwrap();
        assert_eq!(unf.coeff(&int(-3), 1), 1);
        assert_eq!(unf.coeff(&int(4), 0), 26752);
        assert_eq!(kohnen_fold(&unf).unwrap(), f.series);
    }

    #[test]
    fn echelon_family() {
        let basis = plus_basis(12, 30).unwrap();
        let ds: Vec<i64> = basis.iter().map(|f| f.d).collect();
        assert_eq!(ds, vec![0, 3, 4, 7, 8, 11, 12]);
        assert_eq!(basis[0].series, jacobi_theta(30));
        for f in &basis {
            assert_eq!(f.series.valuation(), Some(int(-f.d)));
            for n in -12..=0 {
                if n != -f.d {
                    assert_eq!(f.coeff(n), 0, "f_{} at q^{n}", f.d);
                }
            }
            assert_eq!(f.series.truncation(), Some(int(30)));
        }
        assert!(matches!(plus_form(5, 10), Err(Error::NoSuchBasisElement(5))));
    }
}
