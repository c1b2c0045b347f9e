//! Repackaging a family `{F^(n)}_(n | N)` of index `m` forms into the families
//! `Fhat_(i,j)` and the single form `Fcheck` of type `rho_(m,N)`.
//!
//! Row `i = 0` only needs discrete Fourier transforms. Rows `i != 0` require
//! slashing by elements of the metaplectic group, which is done for members
//! given as sums of eta quotients (see [`EtaSlashEngine`]).

use std::collections::BTreeMap;

use rug::Rational;
use serde_json::{json, Map, Value};

use crate::arith::{divisors, ext_gcd, gcd};
use crate::error::{Error, Result};
use crate::qseries::rational::{frac, is_integer};
use crate::qseries::{
    eta_quotient, json_rational, theta_nullwert, BigFloatComplex, Coefficient, Cyclotomic, EtaFactor, QSeries,
};
use crate::vvforms::VectorValuedForm;
use crate::weil::{mat_mul, weil_rep};

/// `{F^(n)}_(n | N)`, with `F^(n)` of index `m` and level `N/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFamily {
    n: u64,
    m: i64,
    members: BTreeMap<u64, VectorValuedForm>,
}

impl FormFamily {
    pub fn new(n: u64, members: BTreeMap<u64, VectorValuedForm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        let divs = divisors(n);
        let m = members
            .values()
            .next()
            .map(VectorValuedForm::index)
            .ok_or_else(|| Error::InvalidInput("empty family".into()))?;
        for d in &divs {
            let f = members
                .get(d)
                .ok_or_else(|| Error::InvalidInput(format!("family lacks the member for divisor {d}")))?;
            if f.index() != m {
                return Err(Error::InvalidInput(format!("member {d} has index {}, expected {m}", f.index())));
            }
        }
        if let Some(k) = members.keys().find(|k| !divs.contains(k)) {
            return Err(Error::InvalidInput(format!("{k} is not a divisor of {n}")));
        }
        Ok(FormFamily { n, m, members })
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn index(&self) -> i64 {
        self.m
    }

    pub fn member(&self, d: u64) -> &VectorValuedForm {
        &self.members[&d]
    }

    pub fn members(&self) -> impl Iterator<Item = (u64, &VectorValuedForm)> {
        self.members.iter().map(|(&d, f)| (d, f))
    }

    fn gcd_member(&self, j: i64) -> &VectorValuedForm {
        self.member(gcd(j, self.n as i64) as u64)
    }

    pub fn to_json(&self) -> Value {
        let members: Map<String, Value> = self.members.iter().map(|(d, f)| (d.to_string(), f.to_json())).collect();
        json!({ "N": self.n, "members": members })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("N").and_then(Value::as_u64).ok_or_else(|| Error::Json("family needs \"N\"".into()))?;
        let raw = v
            .get("members")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("family needs a \"members\" object".into()))?;
        let mut members = BTreeMap::new();
        for (d, f) in raw {
            let d: u64 = d.parse().map_err(|_| Error::Json(format!("bad divisor label {d:?}")))?;
            members.insert(d, VectorValuedForm::from_json(f)?);
        }
        Self::new(n, members)
    }
}

/// The family `Fhat_(i,j)`, each a vector of `2|m|` components.
#[derive(Debug, Clone, PartialEq)]
pub struct HatFamily {
    pub m: i64,
    pub n: u64,
    pub rows: BTreeMap<(i64, i64), Vec<QSeries<Cyclotomic>>>,
}

impl HatFamily {
    pub fn get(&self, i: i64, j: i64) -> &[QSeries<Cyclotomic>] {
        let n = self.n as i64;
        &self.rows[&(i.rem_euclid(n), j.rem_euclid(n))]
    }
}

/// `Fcheck = (Fcheck_(i,j,r))`, a form of weight 1/2 and type `rho_(m,N)`.
///
/// Component `(i,j,r)` has exponents in `r^2/4m + ij/N + Z`, the eigenvalue of
/// `rho_(m,N)(T)` at that basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckForm {
    m: i64,
    n: u64,
    components: BTreeMap<(i64, i64, i64), QSeries<Cyclotomic>>,
}

impl CheckForm {
    pub fn new(m: i64, n: u64, components: BTreeMap<(i64, i64, i64), QSeries<Cyclotomic>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("index must be nonzero and N positive".into()));
        }
        let (nn, two_m) = (n as i64, 2 * m.abs());
        let mut comps = BTreeMap::new();
        for ((i, j, r), s) in components {
            comps.insert((i.rem_euclid(nn), j.rem_euclid(nn), r.rem_euclid(two_m)), s);
        }
        let f = CheckForm { m, n, components: comps };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        for (&(i, j, r), s) in &self.components {
            let shift = Rational::from((r * r, 4 * self.m)) + Rational::from((i * j, self.n as i64));
            if let Some((e, _)) = s.terms().find(|(e, _)| !is_integer(&Rational::from(e - &shift))) {
                return Err(Error::InvalidInput(format!(
                    "component ({i},{j},{r}) has exponent {e}, expected {} mod 1",
                    frac(&shift)
                )));
            }
            if self.m > 0 {
                let partner = self.component(-i, -j, -r);
                let t = match (s.truncation(), partner.truncation()) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                let same = match &t {
                    Some(t) => s.truncate(t) == partner.truncate(t),
                    None => *s == partner,
                };
                if !same {
                    return Err(Error::InvalidInput(format!("component ({i},{j},{r}) differs from its negative")));
                }
            }
        }
        Ok(())
    }

    pub fn index(&self) -> i64 {
        self.m
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn component(&self, i: i64, j: i64, r: i64) -> QSeries<Cyclotomic> {
        let n = self.n as i64;
        self.components
            .get(&(i.rem_euclid(n), j.rem_euclid(n), r.rem_euclid(2 * self.m.abs())))
            .cloned()
            .unwrap_or_else(QSeries::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&(i64, i64, i64), &QSeries<Cyclotomic>)> {
        self.components.iter()
    }

    /// `Ccheck_(i,j)(D, r)`: the coefficient of `q^(D/4m)` in `Fcheck_(i,j,r)`.
    pub fn coeff(&self, i: i64, j: i64, d: &Rational, r: i64) -> Cyclotomic {
        let e = Rational::from(d / (4 * self.m));
        let n = self.n as i64;
        self.components
            .get(&(i.rem_euclid(n), j.rem_euclid(n), r.rem_euclid(2 * self.m.abs())))
            .map_or_else(Cyclotomic::zero, |s| s.coeff(&e))
    }

    /// The vector `(Fcheck_(i,j,r))_r`.
    pub fn row(&self, i: i64, j: i64) -> Vec<QSeries<Cyclotomic>> {
        (0..2 * self.m.abs()).map(|r| self.component(i, j, r)).collect()
    }

    pub fn to_json(&self) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|(&(i, j, r), s)| json!({ "i": i, "j": j, "r": r, "series": s.to_json() }))
            .collect();
        json!({ "index": self.m, "N": self.n, "components": comps })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let m = v.get("index").and_then(Value::as_i64).ok_or_else(|| Error::Json("needs \"index\"".into()))?;
        let n = v.get("N").and_then(Value::as_u64).ok_or_else(|| Error::Json("needs \"N\"".into()))?;
        let raw = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("needs a \"components\" array".into()))?;
        let mut comps = BTreeMap::new();
        for c in raw {
            let get = |k: &str| c.get(k).and_then(Value::as_i64).ok_or_else(|| Error::Json(format!("component needs {k:?}")));
            let s = c.get("series").ok_or_else(|| Error::Json("component needs \"series\"".into()))?;
            comps.insert((get("i")?, get("j")?, get("r")?), QSeries::from_json(s)?);
        }
        Self::new(m, n, comps)
    }
}

/// `Fcheck_(0,j,r) = (1/N) sum_(j') e(-j j'/N) F^(gcd(j',N))_r`, keyed by `(j, r)`.
///
/// This uses `Fhat_(0,j) = F^(gcd(j,N))`, valid for members modular on `Gamma_0(N/n)`.
pub fn check_row0(fam: &FormFamily) -> BTreeMap<(i64, i64), QSeries<Cyclotomic>> {
    let n = fam.n as i64;
    let hat: Vec<Vec<QSeries<Cyclotomic>>> = (0..n)
        .map(|j| cyclo_row(fam.gcd_member(j)))
        .collect();
    let mut out = BTreeMap::new();
    for (j, row) in forward_dft(&hat, n).into_iter().enumerate() {
        for (r, s) in row.into_iter().enumerate() {
            out.insert((j as i64, r as i64), s);
        }
    }
    out
}

fn cyclo_row(f: &VectorValuedForm) -> Vec<QSeries<Cyclotomic>> {
    f.components().map(|(_, s)| s.to_cyclotomic_series()).collect()
}

/// `out_j = (1/N) sum_(j') e(-j j'/N) rows_(j')`.
fn forward_dft(rows: &[Vec<QSeries<Cyclotomic>>], n: i64) -> Vec<Vec<QSeries<Cyclotomic>>> {
    dft(rows, n, -1, &Rational::from((1, n)))
}

/// `out_j = sum_(j') e(j j'/N) rows_(j')`.
fn inverse_dft(rows: &[Vec<QSeries<Cyclotomic>>], n: i64) -> Vec<Vec<QSeries<Cyclotomic>>> {
    dft(rows, n, 1, &Rational::from(1))
}

fn dft(rows: &[Vec<QSeries<Cyclotomic>>], n: i64, sign: i64, scale: &Rational) -> Vec<Vec<QSeries<Cyclotomic>>> {
    let width = rows.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| {
            (0..width)
                .map(|r| {
                    let mut acc: Option<QSeries<Cyclotomic>> = None;
                    for (jp, row) in rows.iter().enumerate() {
                        let w = Cyclotomic::root_of_unity(sign * j * jp as i64, n).scale(scale);
                        let term = row[r].scale_by(&w);
                        acc = Some(match acc {
                            Some(a) => a.add(&term),
                            None => term,
                        });
                    }
                    simplify_series(acc.unwrap_or_else(QSeries::zero))
                })
                .collect()
        })
        .collect()
}

fn simplify_series(s: QSeries<Cyclotomic>) -> QSeries<Cyclotomic> {
    s.map_coeffs(|c| match c.to_rational() {
        Some(r) => Cyclotomic::from_rational(r),
        None => c.clone(),
    })
}

/// `Fhat_(i,j),r = sum_(j') e(j j'/N) Fcheck_(i,j',r)`.
pub fn inverse_repackage(check: &CheckForm) -> HatFamily {
    let n = check.n as i64;
    let mut rows = BTreeMap::new();
    for i in 0..n {
        let fc: Vec<Vec<QSeries<Cyclotomic>>> = (0..n).map(|j| check.row(i, j)).collect();
        for (j, row) in inverse_dft(&fc, n).into_iter().enumerate() {
            rows.insert((i, j as i64), row);
        }
    }
    HatFamily { m: check.m, n: check.n, rows }
}

/// `Fcheck_(i,j) = (1/N) sum_(j') e(-j j'/N) Fhat_(i,j')`.
pub fn forward_repackage(hat: &HatFamily) -> Result<CheckForm> {
    let n = hat.n as i64;
    let mut comps = BTreeMap::new();
    for i in 0..n {
        let rows: Vec<Vec<QSeries<Cyclotomic>>> = (0..n).map(|j| hat.get(i, j).to_vec()).collect();
        for (j, row) in forward_dft(&rows, n).into_iter().enumerate() {
            for (r, s) in row.into_iter().enumerate() {
                if !s.is_zero() || s.truncation().is_some() {
                    comps.insert((i, j as i64, r as i64), s);
                }
            }
        }
    }
    CheckForm::new(hat.m, hat.n, comps)
}

/// A sum `sum_t c_t prod_k eta(s_k tau)^(e_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTerm {
    pub coeff: Rational,
    pub factors: Vec<EtaFactor>,
}

/// Eta-quotient description of one family member: each component `F_r` is a
/// sum of eta quotients, and `theta * theta^0_m` is added to the whole vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EtaMember {
    pub components: BTreeMap<i64, Vec<EtaTerm>>,
    pub theta: Rational,
}

impl EtaMember {
    /// Expansion of the member at the infinite cusp, known below `q^prec`.
    pub fn expand(&self, m: i64, prec: &Rational) -> Result<VectorValuedForm> {
        let two_m = 2 * m.abs();
        let mut comps = BTreeMap::new();
        for r in 0..two_m {
            let mut s = QSeries::big_o(prec);
            for t in self.components.get(&r).into_iter().flatten() {
                s = s.add(&eta_quotient(&t.factors, prec)?.scale(&t.coeff));
            }
            if self.theta != 0 {
                s = s.add(&theta_nullwert(m as u64, r, prec).scale(&self.theta));
            }
            comps.insert(r, s.normalized());
        }
        VectorValuedForm::new(m, 1, comps)
    }
}

/// Eta-quotient backing for the members `F^(n)` with `n < N` used by rows `i != 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EtaSlashEngine {
    pub members: BTreeMap<u64, EtaMember>,
}

impl EtaSlashEngine {
    pub fn from_json(v: &Value) -> Result<Self> {
        let raw = v
            .get("members")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("engine needs a \"members\" object".into()))?;
        let mut members = BTreeMap::new();
        for (d, mv) in raw {
            let d: u64 = d.parse().map_err(|_| Error::Json(format!("bad divisor label {d:?}")))?;
            let theta = mv.get("theta").map_or(Ok(Rational::new()), json_rational)?;
            let mut comps = BTreeMap::new();
            if let Some(obj) = mv.get("components").and_then(Value::as_object) {
                for (r, terms) in obj {
                    let r: i64 = r.parse().map_err(|_| Error::Json(format!("bad component label {r:?}")))?;
                    let terms = terms.as_array().ok_or_else(|| Error::Json("component must list terms".into()))?;
                    let mut parsed = Vec::new();
                    for t in terms {
                        let coeff = t.get("coeff").map_or(Ok(Rational::from(1)), json_rational)?;
                        let eta = t
                            .get("eta")
                            .and_then(Value::as_array)
                            .ok_or_else(|| Error::Json("term needs an \"eta\" list".into()))?;
                        let mut factors = Vec::new();
                        for f in eta {
                            let pair = f.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                                Error::Json("eta factors are [scale, exponent] pairs".into())
                            })?;
                            let scale = json_rational(&pair[0])?;
                            let e = pair[1].as_i64().ok_or_else(|| Error::Json("eta exponent must be an integer".into()))?;
                            if scale <= 0 {
                                return Err(Error::Json("eta scale must be positive".into()));
                            }
                            factors.push(EtaFactor::new(scale, e));
                        }
                        parsed.push(EtaTerm { coeff, factors });
                    }
                    comps.insert(r, parsed);
                }
            }
            members.insert(d, EtaMember { components: comps, theta });
        }
        Ok(EtaSlashEngine { members })
    }

    pub fn to_json(&self) -> Value {
        let members: Map<String, Value> = self
            .members
            .iter()
            .map(|(d, mem)| {
                let comps: Map<String, Value> = mem
                    .components
                    .iter()
                    .map(|(r, terms)| {
                        let ts: Vec<Value> = terms
                            .iter()
                            .map(|t| {
                                json!({
                                    "coeff": t.coeff.to_json(),
                                    "eta": t.factors.iter().map(|f| json!([f.scale.to_json(), f.exponent])).collect::<Vec<_>>(),
                                })
                            })
                            .collect();
                        (r.to_string(), Value::Array(ts))
                    })
                    .collect();
                (d.to_string(), json!({ "theta": mem.theta.to_json(), "components": comps }))
            })
            .collect();
        json!({ "members": members })
    }

    /// Checks every engine member against the ingested expansion on their common range.
    pub fn verify(&self, fam: &FormFamily) -> Result<()> {
        for (&d, mem) in &self.members {
            let Some(f) = fam.members.get(&d) else { continue };
            let t = f.truncation().unwrap_or_else(|| Rational::from(10));
            let e = mem.expand(fam.m, &t)?;
            for r in 0..2 * fam.m.abs() {
                if !e.component(r).agrees_below(&f.component(r).truncate(&t), &t) {
                    return Err(Error::Consistency(format!(
                        "engine member {d} disagrees with the family at component {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A 2x2 integer matrix `[[a, b], [c, d]]`.
pub type Mat2 = [[i64; 2]; 2];

pub const S_MAT: Mat2 = [[0, -1], [1, 0]];

fn mat2_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// Dedekind sum `s(d, c) = sum_(k=1)^(c-1) ((k/c)) ((dk/c))` for `c > 0`.
pub fn dedekind_sum(d: i64, c: i64) -> Rational {
    assert!(c > 0);
    let saw = |num: i64, den: i64| -> Rational {
        if num.rem_euclid(den) == 0 {
            Rational::new()
        } else {
            Rational::from((num.rem_euclid(den), den)) - Rational::from((1, 2))
        }
    };
    (1..c).map(|k| saw(k, c) * saw(d * k, c)).sum()
}

/// `kappa` with `eta(gamma z) = kappa sqrt(cz + d) eta(z)` for every `z` in the
/// upper half-plane, principal square root; returned as the phase of `kappa`.
pub fn eta_multiplier(g: &Mat2) -> Rational {
    let [[a, b], [c, d]] = *g;
    let eps = |a: i64, c: i64, d: i64| Rational::from((a + d, 24 * c)) - dedekind_sum(d, c) / 2;
    let phase = if c > 0 {
        eps(a, c, d) - Rational::from((1, 8))
    } else if c < 0 {
        eps(-a, -c, -d) + Rational::from((1, 8))
    } else if d == 1 {
        Rational::from((b, 24))
    } else {
        // gamma z = z - b
        Rational::from((-b, 24)) - Rational::from((1, 4))
    };
    frac(&phase)
}

/// For `eta(s gamma tau)` with `s = p/q`, returns `(phase, ratio, scale, shift)` with
/// `eta(s gamma tau) = e(phase) sqrt(ratio) sqrt(c tau + d) eta(scale tau + shift)`.
fn eta_factor_transform(s: &Rational, g: &Mat2) -> (Rational, Rational, Rational, Rational) {
    let p = s.numer().to_i64().expect("scale out of range");
    let q = s.denom().to_i64().expect("scale out of range");
    let [[a, b], [c, d]] = *g;
    let (m00, m01, m10, m11) = (p * a, p * b, q * c, q * d);
    let big_a = gcd(m00, m10);
    let (g0, g1) = (m00 / big_a, m10 / big_a);
    // x g0 + y g1 = 1 gives gamma' = [[g0, -y], [g1, x]]
    let (_, x, y) = ext_gcd(g0, g1);
    let gp: Mat2 = [[g0, -y], [g1, x]];
    // U = gamma'^-1 M with gamma'^-1 = [[x, y], [-g1, g0]]
    let u01 = x * m01 + y * m11;
    let u11 = -g1 * m01 + g0 * m11;
    debug_assert_eq!(-g1 * m00 + g0 * m10, 0);
    let big_d = u11;
    assert!(big_d > 0 && big_a > 0, "unexpected sign in Hermite form");
    // shift B into [0, D) by gamma' -> gamma' T^k
    let k = u01.div_euclid(big_d);
    let big_b = u01 - k * big_d;
    let gp = mat2_mul(&gp, &[[1, k], [0, 1]]);
    let phase = eta_multiplier(&gp);
    let ratio = Rational::from((q, big_d));
    (phase, ratio, Rational::from((big_a, big_d)), Rational::from((big_b, big_d)))
}

enum Letter {
    S,
    T(i64),
}

/// Writes `gamma = T^k1 S T^k2 S ... ` exactly (using `S^2 = -1` for signs).
fn sl2_word(g: &Mat2) -> Vec<Letter> {
    let mut word = Vec::new();
    let mut cur = *g;
    while cur[1][0] != 0 {
        let [[a, b], [c, d]] = cur;
        let k = a.div_euclid(c);
        let (r, x) = (a - k * c, b - k * d);
        if k != 0 {
            word.push(Letter::T(k));
        }
        word.push(Letter::S);
        cur = [[c, d], [-r, -x]];
    }
    let [[a, b], _] = cur;
    if a == 1 {
        if b != 0 {
            word.push(Letter::T(b));
        }
    } else {
        // cur = -T^(-b)
        word.push(Letter::S);
        word.push(Letter::S);
        if b != 0 {
            word.push(Letter::T(-b));
        }
    }
    word
}

/// `rho_m(gamma, u)` where `u` is the principal branch of `sqrt(c tau + d)`.
pub fn rho_m_gamma(m: i64, g: &Mat2) -> Result<Vec<Vec<Cyclotomic>>> {
    let w = weil_rep(m, 1)?;
    let rs = w.rho_s();
    let rt = w.rho_t();
    let dim = rt.len();
    let mut rho: Vec<Vec<Cyclotomic>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { Cyclotomic::one() } else { Cyclotomic::zero() }).collect())
        .collect();
    let word = sl2_word(g);
    for l in &word {
        rho = match l {
            Letter::S => mat_mul(&rho, &rs),
            Letter::T(k) => {
                let tk: Vec<Cyclotomic> = (0..dim)
                    .map(|idx| Cyclotomic::e(&Rational::from(&w.t_phase(idx) * *k)))
                    .collect();
                rho.iter().map(|row| row.iter().zip(&tk).map(|(x, y)| x.mul(y)).collect()).collect()
            }
        };
    }
    // Metaplectic cocycle of the word, evaluated at a test point.
    let digits = 30;
    let tau0 = BigFloatComplex::from_f64(0.1234, 0.9876, digits);
    let mut z = tau0.clone();
    let mut u = BigFloatComplex::one(digits);
    for l in word.iter().rev() {
        match l {
            Letter::S => {
                u = u.mul(&z.sqrt());
                z = BigFloatComplex::one(digits).neg().div(&z);
            }
            Letter::T(k) => {
                z = z.add(&BigFloatComplex::from_f64(*k as f64, 0.0, digits));
            }
        }
    }
    let [_, [c, d]] = *g;
    let want = tau0
        .scale_rational(&Rational::from(c))
        .add(&BigFloatComplex::from_f64(d as f64, 0.0, digits))
        .sqrt();
    if u.dist(&want) > 1e-10 {
        debug_assert!(u.dist(&want.neg()) < 1e-10);
        rho = rho.iter().map(|row| row.iter().map(Cyclotomic::neg).collect()).collect();
    }
    Ok(rho)
}

/// `F|_m (gamma, u)` with `u = sqrt(c tau + d)`: returns
/// `rho_m(gamma,u)^-1 u(tau)^-1 F(gamma tau)` expanded below `q^prec`.
pub fn eta_slash(m: i64, member: &EtaMember, g: &Mat2, prec: &Rational) -> Result<Vec<QSeries<Cyclotomic>>> {
    let two_m = 2 * m.abs();
    let mut at_gamma: Vec<QSeries<Cyclotomic>> = Vec::with_capacity(two_m as usize);
    for r in 0..two_m {
        let mut acc = QSeries::<Cyclotomic>::big_o(prec);
        for t in member.components.get(&r).into_iter().flatten() {
            acc = acc.add(&slash_term(t, g, prec)?);
        }
        at_gamma.push(acc);
    }
    let rho = rho_m_gamma(m, g)?;
    // unitary: rho^-1 = conjugate transpose
    let mut out = Vec::with_capacity(two_m as usize);
    for r in 0..two_m as usize {
        let mut acc = QSeries::<Cyclotomic>::big_o(prec);
        for (k, comp) in at_gamma.iter().enumerate() {
            let c = rho[k][r].conj();
            if !c.is_zero() && !comp.is_zero() {
                acc = acc.add(&comp.scale_by(&c));
            }
        }
        if member.theta != 0 {
            let th = theta_nullwert(m as u64, r as i64, prec).scale(&member.theta);
            acc = acc.add(&th.to_cyclotomic_series());
        }
        out.push(simplify_series(acc.normalized()));
    }
    Ok(out)
}

/// `c prod eta(s_k gamma tau)^(e_k) / sqrt(c tau + d)` as a series in `tau`.
fn slash_term(t: &EtaTerm, g: &Mat2, prec: &Rational) -> Result<QSeries<Cyclotomic>> {
    let weight2: i64 = t.factors.iter().map(|f| f.exponent).sum();
    if weight2 != 1 {
        return Err(Error::Weight(format!("eta quotient has weight {weight2}/2, expected 1/2")));
    }
    let parts: Vec<_> = t.factors.iter().map(|f| (f, eta_factor_transform(&f.scale, g))).collect();
    let vals: Vec<Rational> = parts
        .iter()
        .map(|(f, (_, _, s, _))| Rational::from(s * f.exponent) / 24)
        .collect();
    let total_val: Rational = vals.iter().sum();
    let mut konst = Cyclotomic::from_rational(t.coeff.clone());
    let mut series = QSeries::<Cyclotomic>::one();
    for ((f, (phase, ratio, s, beta)), v) in parts.iter().zip(&vals) {
        let e = f.exponent;
        konst = konst.mul(&Cyclotomic::e(&Rational::from(phase * e)));
        let half = ratio.clone().pow_int(e.div_euclid(2));
        konst = konst.scale(&half);
        if e.rem_euclid(2) == 1 {
            konst = konst.mul(&Cyclotomic::sqrt_rational(ratio));
        }
        let others = Rational::from(&total_val - v);
        let inner_prec = Rational::from(prec - &others) / s;
        let inner_prec = inner_prec.max(Rational::from(e) / 24 + 1);
        let base = eta_quotient(&[EtaFactor::int(1, e)], &inner_prec)?;
        series = series.mul(&base.substitute(s, beta));
    }
    Ok(series.scale_by(&konst).truncate(prec))
}

trait PowInt {
    fn pow_int(self, e: i64) -> Rational;
}

impl PowInt for Rational {
    fn pow_int(self, e: i64) -> Rational {
        let mut acc = Rational::from(1);
        let base = if e < 0 { self.recip() } else { self };
        for _ in 0..e.unsigned_abs() {
            acc *= &base;
        }
        acc
    }
}

/// `F|_m S`: the engine's S-transformation of one member.
pub fn eta_slash_s(m: i64, member: &EtaMember, prec: &Rational) -> Result<Vec<QSeries<Cyclotomic>>> {
    eta_slash(m, member, &S_MAT, prec)
}

/// How to lift the bottom row `(i/n, j/n) mod N/n` to a matrix in `SL_2(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completion {
    /// Smallest nonnegative lift of the bottom row, then the smallest top row.
    #[default]
    Smallest,
    /// The next admissible bottom row, multiplied on the left by `T`.
    Shifted,
}

/// The matrix `gamma_0` relating `(0, n)` to `(i, j)` for `n = gcd(i, j, N)`.
pub fn gamma0_for(i: i64, j: i64, n_level: u64, how: Completion) -> Mat2 {
    let nn = n_level as i64;
    let n = gcd(gcd(i, j), nn);
    let np = nn / n;
    let c = (i / n).rem_euclid(np);
    let mut d = (j / n).rem_euclid(np);
    let mut skip = matches!(how, Completion::Shifted);
    loop {
        if gcd(c, d) == 1 {
            if !skip {
                break;
            }
            skip = false;
        }
        d += np;
    }
    let g = if c == 0 {
        // d = 1 in this branch
        [[1, 0], [0, 1]]
    } else {
        let a = (0..c.max(1)).find(|&a| (a * d - 1).rem_euclid(c) == 0).unwrap_or(0);
        [[a, (a * d - 1) / c], [c, d]]
    };
    match how {
        Completion::Smallest => g,
        Completion::Shifted => mat2_mul(&[[1, 1], [0, 1]], &g),
    }
}

/// Full repackaging: `Fhat` from the family (row 0) and the engine (rows `i != 0`),
/// then `Fcheck` by the discrete Fourier transform.
pub fn repackage_full(fam: &FormFamily, engine: &EtaSlashEngine, prec: &Rational) -> Result<CheckForm> {
    repackage_full_with(fam, engine, prec, Completion::Smallest)
}

pub fn repackage_full_with(
    fam: &FormFamily,
    engine: &EtaSlashEngine,
    prec: &Rational,
    how: Completion,
) -> Result<CheckForm> {
    forward_repackage(&hat_family(fam, engine, prec, how)?)
}

pub fn hat_family(fam: &FormFamily, engine: &EtaSlashEngine, prec: &Rational, how: Completion) -> Result<HatFamily> {
    let n = fam.n as i64;
    let mut rows = BTreeMap::new();
    for j in 0..n {
        let row = cyclo_row(fam.gcd_member(j)).into_iter().map(|s| s.truncate(prec)).collect();
        rows.insert((0, j), row);
    }
    for i in 1..n {
        for j in 0..n {
            let d = gcd(gcd(i, j), n) as u64;
            let member = engine.members.get(&d).ok_or(Error::EngineGap(d))?;
            let g = gamma0_for(i, j, fam.n, how);
            rows.insert((i, j), eta_slash(fam.m, member, &g, prec)?);
        }
    }
    Ok(HatFamily { m: fam.m, n: fam.n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::eta_spec;
    use crate::qseries::rational::{int, rat};

    fn theta_member() -> EtaMember {
        EtaMember {
            components: BTreeMap::from([
                (0, vec![EtaTerm { coeff: int(1), factors: eta_spec(&[(2, 5), (1, -2), (4, -2)]) }]),
                (1, vec![EtaTerm { coeff: int(2), factors: eta_spec(&[(4, 2), (2, -1)]) }]),
            ]),
            theta: Rational::new(),
        }
    }

    #[test]
    fn dedekind_sums() {
        assert_eq!(dedekind_sum(1, 3), rat(1, 18));
        assert_eq!(dedekind_sum(1, 5), rat(1, 5));
        assert_eq!(dedekind_sum(2, 5), int(0));
    }

    fn eta_num(z: &BigFloatComplex) -> BigFloatComplex {
        let s = eta_quotient(&eta_spec(&[(1, 1)]), &int(60)).unwrap();
        s.evaluate(z, 30).unwrap()
    }

    #[test]
    fn eta_multiplier_numeric() {
        let z = BigFloatComplex::from_f64(0.21, 2.3, 30);
        for g in [[[0, -1], [1, 0]], [[1, 1], [0, 1]], [[-1, 3], [0, -1]], [[2, 1], [1, 1]], [[1, 0], [-3, 1]], [[-2, -1], [-5, -3]]] {
            let [[a, b], [c, d]] = g;
            let gz = z
                .scale_rational(&int(a))
                .add(&BigFloatComplex::from_f64(b as f64, 0.0, 30))
                .div(&z.scale_rational(&int(c)).add(&BigFloatComplex::from_f64(d as f64, 0.0, 30)));
            if gz.im().to_f64() < 0.35 {
                continue;
            }
            let lhs = eta_num(&gz);
            let sq = z.scale_rational(&int(c)).add(&BigFloatComplex::from_f64(d as f64, 0.0, 30)).sqrt();
            let k = Coefficient::to_complex(&Cyclotomic::e(&eta_multiplier(&g)), 30);
            let rhs = k.mul(&sq).mul(&eta_num(&z));
            assert!(lhs.dist(&rhs) < 1e-15, "{g:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn theta_vector_is_invariant() {
        let p = int(6);
        let out = eta_slash_s(1, &theta_member(), &p).unwrap();
        assert_eq!(out[0], theta_nullwert(1, 0, &p).to_cyclotomic_series());
        assert_eq!(out[1], theta_nullwert(1, 1, &p).to_cyclotomic_series());
        let out = eta_slash(1, &theta_member(), &[[2, 1], [5, 3]], &p).unwrap();
        assert_eq!(out[1], theta_nullwert(1, 1, &p).to_cyclotomic_series());
    }

    #[test]
    fn weight_mismatch() {
        let bad = EtaMember {
            components: BTreeMap::from([(0, vec![EtaTerm { coeff: int(1), factors: eta_spec(&[(1, 2)]) }])]),
            theta: Rational::new(),
        };
        assert!(matches!(eta_slash_s(1, &bad, &int(3)), Err(Error::Weight(_))));
    }

    #[test]
    fn rho_of_words() {
        let s = rho_m_gamma(1, &S_MAT).unwrap();
        assert_eq!(s, weil_rep(1, 1).unwrap().rho_s());
        // (-1, i) acts by rho(S)^2 = e(-1/4) P; the principal branch of sqrt(-1) is i
        let minus = rho_m_gamma(2, &[[-1, 0], [0, -1]]).unwrap();
        let s2 = {
            let s = weil_rep(2, 1).unwrap().rho_s();
            mat_mul(&s, &s)
        };
        assert_eq!(minus, s2);
    }

    #[test]
    fn gamma0_choices() {
        assert_eq!(gamma0_for(1, 0, 2, Completion::Smallest), S_MAT);
        assert_eq!(gamma0_for(1, 1, 2, Completion::Smallest), [[0, -1], [1, 1]]);
        for n in 2..7u64 {
            for i in 1..n as i64 {
                for j in 0..n as i64 {
                    for how in [Completion::Smallest, Completion::Shifted] {
                        let g = gamma0_for(i, j, n, how);
                        assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
                        let d = gcd(gcd(i, j), n as i64);
                        let np = n as i64 / d;
                        assert_eq!((g[1][0] - i / d).rem_euclid(np), 0);
                        assert_eq!((g[1][1] - j / d).rem_euclid(np), 0);
                    }
                }
            }
        }
    }

    fn n2_engine() -> EtaSlashEngine {
        EtaSlashEngine {
            members: BTreeMap::from([(
                1,
                EtaMember {
                    components: BTreeMap::from([
                        (0, vec![EtaTerm { coeff: int(128), factors: eta_spec(&[(1, 6), (4, 14), (2, -19)]) }]),
                        (1, vec![EtaTerm { coeff: int(1), factors: eta_spec(&[(2, 23), (1, -8), (4, -14)]) }]),
                    ]),
                    theta: Rational::new(),
                },
            )]),
        }
    }

    fn n2_family(prec: i64) -> FormFamily {
        let p = int(prec);
        let f1 = n2_engine().members[&1].expand(1, &p).unwrap().with_level(2);
        let f2 = crate::vvforms::f0(4 * prec).unwrap().unfold().unwrap().with_level(1);
        FormFamily::new(2, BTreeMap::from([(1, f1), (2, f2)])).unwrap()
    }

    fn ints(s: &QSeries<Cyclotomic>, exps: &[(i64, i64)]) -> Vec<Rational> {
        exps.iter().map(|&(n, d)| s.coeff(&rat(n, d)).to_rational().unwrap()).collect()
    }

    #[test]
    fn n2_golden_hat() {
        let fam = n2_family(3);
        let eng = n2_engine();
        eng.verify(&fam).unwrap();
        let hat = hat_family(&fam, &eng, &int(2), Completion::Smallest).unwrap();
        let h = hat.get(1, 0);
        assert_eq!(ints(&h[0], &[(0, 1), (1, 2), (1, 1), (3, 2)]), [int(8), int(768), int(13328), int(125440)]);
        assert_eq!(ints(&h[1], &[(1, 4), (3, 4), (5, 4)]), [int(-112), int(-3584), int(-43008)]);
        let alt = hat_family(&fam, &eng, &int(2), Completion::Shifted).unwrap();
        assert_eq!(hat, alt);
    }

    #[test]
    fn n2_golden_check() {
        let fam = n2_family(3);
        let p = int(2);
        let check = repackage_full(&fam, &n2_engine(), &p).unwrap();
        let half = rat(1, 2);
        let (f1, f2) = (fam.member(1), fam.member(2));
        for r in 0..2 {
            let a = f2.component(r).scale(&half);
            let b = f1.component(r).scale(&half);
            let th = theta_nullwert(1, r, &p).scale(&int(8));
            let row00 = a.add(&b).truncate(&p).to_cyclotomic_series();
            let row01 = a.sub(&b).truncate(&p).to_cyclotomic_series();
            let row10 = a.sub(&b).add(&th).truncate(&p).to_cyclotomic_series();
            assert_eq!(check.component(0, 0, r), row00);
            assert_eq!(check.component(0, 1, r), row01);
            assert_eq!(check.component(1, 0, r), row10);
        }
        let back = inverse_repackage(&check);
        assert_eq!(back.get(0, 1)[1], fam.member(1).component(1).truncate(&p).to_cyclotomic_series());
    }
}
