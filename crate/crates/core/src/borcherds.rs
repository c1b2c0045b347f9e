//! Generalized class numbers, twined Borcherds products `Psi^W_g`, the eta
//! products `eta^W_g`, their quotients `T^W_g`, the Fock-space traces of
//! `SQ(W)` and twisted products `Psi^W_(D1,r1,g)`.

use std::collections::BTreeMap;

use rug::{Integer, Rational};
use serde_json::{json, Map, Value};

use crate::arith::{divisors, euler_phi, factorize, is_fundamental, kronecker};
use crate::error::{Error, Result};
use crate::qseries::rational::{is_integer, parse_rational, to_i64};
use crate::qseries::{eta_quotient, eta_spec, json_rational, theta_nullwert, Coefficient, Cyclotomic, QSeries, Quadratic};
use crate::repackage::{check_row0, FormFamily};
use crate::repth::{decompose, lambda_trace, weight_identity, CharacterTable, LambdaSign, VirtualModuleTraces};
use crate::vvforms::{plus_form, VectorValuedForm};

/// Hurwitz class number `H(n)`: reduced positive definite forms of discriminant
/// `-n`, with `[a,0,a]` weighted 1/2 and `[a,a,a]` weighted 1/3; `H(0) = -1/12`.
pub fn hurwitz(dabs: u64) -> Rational {
    if dabs == 0 {
        return Rational::from((-1, 12));
    }
    if !matches!(dabs % 4, 0 | 3) {
        return Rational::new();
    }
    let n = dabs as i64;
    let mut h = Rational::new();
    let mut b = (n % 2) as i64;
    while 3 * b * b <= n {
        let ac = (b * b + n) / 4;
        let mut a = b.max(1);
        while a * a <= ac {
            if ac % a == 0 {
                let c = ac / a;
                if b == 0 || a == b || a == c {
                    h += if b == 0 && a == c {
                        Rational::from((1, 2))
                    } else if a == b && b == c {
                        Rational::from((1, 3))
                    } else {
                        Rational::from(1)
                    };
                } else {
                    h += 2;
                }
            }
            a += 1;
        }
        b += 2;
    }
    h
}

/// User-supplied `H_m(D, r)` for indices `m > 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassNumberPlugin {
    table: BTreeMap<(i64, i64, i64), Rational>,
}

impl ClassNumberPlugin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, m: i64, d: i64, r: i64, h: Rational) {
        let r = r.rem_euclid(2 * m);
        self.table.insert((m, d, r), h.clone());
        self.table.insert((m, d, (2 * m - r) % (2 * m)), h);
    }

    pub fn get(&self, m: i64, d: i64, r: i64) -> Option<&Rational> {
        self.table.get(&(m, d, r.rem_euclid(2 * m)))
    }

    /// `{"m": 2, "values": [[D, r, "H"], ...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let m = v.get("m").and_then(Value::as_i64).ok_or_else(|| Error::Json("plugin needs \"m\"".into()))?;
        let rows = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("plugin needs a \"values\" array".into()))?;
        let mut p = Self::new();
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == 3).ok_or_else(|| Error::Json("plugin rows are [D, r, H]".into()))?;
            let d = row[0].as_i64().ok_or_else(|| Error::Json("D must be an integer".into()))?;
            let r = row[1].as_i64().ok_or_else(|| Error::Json("r must be an integer".into()))?;
            p.insert(m, d, r, json_rational(&row[2])?);
        }
        Ok(p)
    }
}

/// One conjugacy class of `G` with its McKay-Thompson form `F^W_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct WClass {
    pub name: String,
    pub order: u64,
    pub level: u64,
    /// Prime power maps; a missing prime must be prime to the order and fixes the class.
    pub powers: BTreeMap<u64, String>,
    pub form: VectorValuedForm,
}

/// A rational weakly holomorphic `G`-module of weight 1/2 and index `m`, given
/// by the forms `F^W_g` with coefficients `C^W_g(D, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WModuleData {
    index: i64,
    classes: Vec<WClass>,
}

impl WModuleData {
    pub fn new(index: i64, classes: Vec<WClass>) -> Result<Self> {
        if index < 1 {
            return Err(Error::InvalidInput(format!("index must be positive, got {index}")));
        }
        let w = WModuleData { index, classes };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if self.classes.iter().filter(|c| c.order == 1).count() != 1 {
            return Err(Error::InvalidCharacterData("exactly one identity class is required".into()));
        }
        for c in &self.classes {
            if c.form.index() != self.index {
                return Err(Error::InvalidInput(format!("class {} has index {}", c.name, c.form.index())));
            }
            if c.level % c.order != 0 || (c.order * c.order) % c.level != 0 {
                return Err(Error::InvalidCharacterData(format!(
                    "class {}: level {} must satisfy o(g) | N | o(g)^2",
                    c.name, c.level
                )));
            }
            for (p, target) in &c.powers {
                let t = self
                    .class_index(target)
                    .ok_or_else(|| Error::InvalidCharacterData(format!("power map of {} leaves the class list", c.name)))?;
                let want = c.order / crate::arith::gcd_u(c.order, *p);
                if self.classes[t].order != want {
                    return Err(Error::InvalidCharacterData(format!(
                        "{}^{p} = {target} has order {}, expected {want}",
                        c.name, self.classes[t].order
                    )));
                }
            }
            for (p, _) in factorize(c.order) {
                if !c.powers.contains_key(&p) {
                    return Err(Error::InvalidCharacterData(format!("class {} lacks its {p}-power map", c.name)));
                }
            }
            for (r, s) in c.form.components() {
                for (e, x) in s.terms() {
                    if !is_integer(x) {
                        return Err(Error::InvalidCharacterData(format!(
                            "class {}: coefficient {x} at q^{e} of component {r} is not an integer",
                            c.name
                        )));
                    }
                }
            }
        }
        for c in 0..self.classes.len() {
            self.traces(c, 0, 0)?;
        }
        Ok(())
    }

    /// Parses the JSON schema; `plus` and `theta` sources are expanded for all `D < dmax`.
    ///
    /// ```json
    /// {"index": 1, "classes": [{"name": "1A", "order": 1, "level": 1, "powers": {},
    ///   "components": {"1": [["-3", 3]]}, "truncation": "12", "plus": {"3": 3}, "theta": 0}]}
    /// ```
    pub fn from_json(v: &Value, dmax: i64) -> Result<Self> {
        let index = v.get("index").and_then(Value::as_i64).ok_or_else(|| Error::Json("$.index: expected a positive integer".into()))?;
        let raw = v
            .get("classes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("$.classes: expected an array".into()))?;
        let mut classes = Vec::new();
        for (i, c) in raw.iter().enumerate() {
            let path = format!("$.classes[{i}]");
            let name = c.get("name").and_then(Value::as_str).ok_or_else(|| Error::Json(format!("{path}.name: expected a string")))?;
            let order = c.get("order").and_then(Value::as_u64).filter(|&o| o > 0).ok_or_else(|| Error::Json(format!("{path}.order: expected a positive integer")))?;
            let level = match c.get("level") {
                None => order,
                Some(l) => l.as_u64().filter(|&l| l > 0).ok_or_else(|| Error::Json(format!("{path}.level: expected a positive integer")))?,
            };
            let mut powers = BTreeMap::new();
            if let Some(p) = c.get("powers") {
                let p = p.as_object().ok_or_else(|| Error::Json(format!("{path}.powers: expected an object")))?;
                for (k, t) in p {
                    let k: u64 = k.parse().map_err(|_| Error::Json(format!("{path}.powers: key {k:?} is not a prime")))?;
                    let t = t.as_str().ok_or_else(|| Error::Json(format!("{path}.powers.{k}: expected a class name")))?;
                    powers.insert(k, t.to_string());
                }
            }
            let form = parse_form(c, index, level, dmax, &path)?;
            classes.push(WClass { name: name.to_string(), order, level, powers, form });
        }
        Self::new(index, classes)
    }

    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                let powers: Map<String, Value> = c.powers.iter().map(|(p, t)| (p.to_string(), json!(t))).collect();
                let mut comps = Map::new();
                for (r, s) in c.form.components() {
                    let rows: Vec<Value> = s
                        .terms()
                        .map(|(e, x)| json!([crate::qseries::rational::format_rational(&(e * 4 * self.index)), x.to_json()]))
                        .collect();
                    if !rows.is_empty() {
                        comps.insert(r.to_string(), Value::Array(rows));
                    }
                }
                let mut obj = json!({
                    "name": c.name, "order": c.order, "level": c.level, "powers": powers, "components": comps,
                });
                if let Some(t) = c.form.truncation() {
                    obj["truncation"] = json!(crate::qseries::rational::format_rational(&(t * 4 * self.index)));
                }
                obj
            })
            .collect();
        json!({ "index": self.index, "classes": classes })
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn classes(&self) -> &[WClass] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.class_index(name).ok_or_else(|| Error::InvalidInput(format!("unknown class {name:?}")))
    }

    pub fn identity(&self) -> usize {
        self.classes.iter().position(|c| c.order == 1).unwrap()
    }

    /// The class of `g^k` for `g` in class `c`.
    pub fn power_class(&self, c: usize, k: u64) -> usize {
        let k = k % self.classes[c].order;
        if k == 0 {
            return self.identity();
        }
        let mut cur = c;
        for (p, e) in factorize(k) {
            for _ in 0..e {
                if let Some(t) = self.classes[cur].powers.get(&p) {
                    cur = self.class_index(t).unwrap();
                }
            }
        }
        cur
    }

    /// `C^W_g(D, r)` for the class with index `c`.
    pub fn coeff(&self, c: usize, d: i64, r: i64) -> Result<Integer> {
        let x = self.classes[c].form.get(&Rational::from(d), r).ok_or_else(|| {
            Error::Precision(format!("C(D = {d}, r = {r}) of class {} is beyond the known range", self.classes[c].name))
        })?;
        Ok(x.numer().clone())
    }

    /// The smallest `D` not covered by every class, if any.
    pub fn known_below(&self) -> Option<Rational> {
        self.classes.iter().filter_map(|c| c.form.truncation()).min().map(|t| t * 4 * self.index)
    }

    /// Trace data `tr(g^d | W_(r, D/4m))` for `g` in class `c`.
    pub fn traces(&self, c: usize, d: i64, r: i64) -> Result<VirtualModuleTraces> {
        let o = self.classes[c].order;
        let mut t = BTreeMap::new();
        for k in divisors(o) {
            t.insert(k, self.coeff(self.power_class(c, k), d, r)?);
        }
        VirtualModuleTraces::new(o, t).map_err(|e| match e {
            Error::InvalidCharacterData(s) => {
                Error::InvalidCharacterData(format!("class {}, (D, r) = ({d}, {r}): {s}", self.classes[c].name))
            }
            e => e,
        })
    }

    /// `{F^W_(g^n)}_(n | N_g)` for repackaging.
    pub fn family(&self, c: usize) -> Result<FormFamily> {
        let n = self.classes[c].level;
        let members = divisors(n)
            .into_iter()
            .map(|d| (d, self.classes[self.power_class(c, d)].form.clone()))
            .collect();
        FormFamily::new(n, members)
    }

    /// Checks `v_b` integrality at every `(D, r)` below the common known range
    /// with a nonzero coefficient in some class.
    pub fn check_traces(&self) -> Result<()> {
        let m4 = 4 * self.index;
        let bound = self.known_below();
        let mut keys = std::collections::BTreeSet::new();
        for c in &self.classes {
            for (r, s) in c.form.components() {
                for (e, _) in s.terms() {
                    let d = e * m4;
                    if bound.as_ref().is_some_and(|b| d >= *b) {
                        break;
                    }
                    if !is_integer(&d) {
                        return Err(Error::InvalidInput(format!("class {}: D = {d} is not an integer", c.name)));
                    }
                    keys.insert((to_i64(&d), r));
                }
            }
        }
        for c in 0..self.classes.len() {
            for &(d, r) in &keys {
                self.traces(c, d, r)?;
            }
        }
        Ok(())
    }
}

fn parse_form(c: &Value, m: i64, level: u64, dmax: i64, path: &str) -> Result<VectorValuedForm> {
    let m4 = 4 * m;
    let trunc = match c.get("truncation") {
        None | Some(Value::Null) => None,
        Some(t) => Some(json_rational(t).map_err(|e| Error::Json(format!("{path}.truncation: {e}")))? / m4),
    };
    let mut comps: BTreeMap<i64, Vec<(Rational, Rational)>> = BTreeMap::new();
    if let Some(raw) = c.get("components") {
        let raw = raw.as_object().ok_or_else(|| Error::Json(format!("{path}.components: expected an object")))?;
        for (r, rows) in raw {
            let rp = format!("{path}.components.{r}");
            let r: i64 = r.parse().map_err(|_| Error::Json(format!("{rp}: key is not an integer")))?;
            let rows = rows.as_array().ok_or_else(|| Error::Json(format!("{rp}: expected an array of [D, C]")))?;
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .filter(|x| x.len() == 2)
                    .ok_or_else(|| Error::Json(format!("{rp}[{i}]: expected [D, C]")))?;
                let d = match &row[0] {
                    Value::String(s) => parse_rational(s)?,
                    v => json_rational(v)?,
                };
                let x = json_rational(&row[1]).map_err(|e| Error::Json(format!("{rp}[{i}]: {e}")))?;
                comps.entry(r).or_default().push((d / m4, x));
            }
        }
    }
    let mut series: BTreeMap<i64, QSeries> = comps
        .into_iter()
        .map(|(r, terms)| (r, QSeries::from_terms(terms, trunc.clone())))
        .collect();
    for r in 0..2 * m {
        series.entry(r).or_insert_with(|| match &trunc {
            Some(t) => QSeries::big_o(t),
            None => QSeries::zero(),
        });
    }
    let mut form = VectorValuedForm::new(m, level, series).map_err(|e| Error::Json(format!("{path}: {e}")))?;
    let cap = Rational::from((dmax, m4));
    if let Some(theta) = c.get("theta") {
        let t = json_rational(theta).map_err(|e| Error::Json(format!("{path}.theta: {e}")))?;
        if t != 0 {
            let comps = (0..2 * m).map(|r| (r, theta_nullwert(m as u64, r, &cap))).collect();
            let th = VectorValuedForm::new(m, level, comps)?;
            form = form.add(&th.scale(&t))?;
        }
    }
    if let Some(plus) = c.get("plus") {
        let plus = plus.as_object().ok_or_else(|| Error::Json(format!("{path}.plus: expected an object")))?;
        if m != 1 && !plus.is_empty() {
            return Err(Error::Unsupported("plus-space sources need index 1".into()));
        }
        for (d, x) in plus {
            let d: i64 = d.parse().map_err(|_| Error::Json(format!("{path}.plus: key {d:?} is not an integer")))?;
            let x = json_rational(x)?;
            let f = plus_form(d, dmax.max(1))?.unfold()?.with_level(level);
            form = form.add(&f.scale(&x))?;
        }
    }
    Ok(form)
}

/// `H^W = sum_(r mod 2m) sum_(D <= 0) C^W(D, r) H_m(D, r)` over the identity class.
pub fn class_number_h(w: &WModuleData, plugin: Option<&ClassNumberPlugin>) -> Result<Rational> {
    let m = w.index;
    let e = &w.classes[w.identity()];
    let mut h = Rational::new();
    for (r, s) in e.form.components() {
        for (ex, x) in s.terms() {
            if ex > 0 {
                break;
            }
            let d = to_i64(&(ex * 4 * m));
            let hm = if m == 1 {
                hurwitz(d.unsigned_abs())
            } else {
                plugin
                    .and_then(|p| p.get(m, d, r))
                    .cloned()
                    .ok_or(Error::MissingClassNumber { m, d, r })?
            };
            h += hm * x;
        }
    }
    Ok(h)
}

/// `k^W_g = (1/N) sum_(n | N) phi(N/n) C^W_(g^n)(0, 0)`, checked against the
/// eta product weight `sum_(n | N) v_n(g | W_(0,0))`.
pub fn weight_k(w: &WModuleData, class: &str) -> Result<Rational> {
    let c = w.lookup(class)?;
    let n = w.classes[c].level;
    let mut k = Rational::new();
    for d in divisors(n) {
        k += Rational::from(w.coeff(w.power_class(c, d), 0, 0)? * euler_phi(n / d));
    }
    k /= n;
    let (lhs, rhs) = weight_identity(&w.traces(c, 0, 0)?, n)?;
    if lhs != k || rhs != k {
        return Err(Error::Consistency(format!("weight of class {class}: {k} vs eta weight {rhs}")));
    }
    Ok(k)
}

fn ceil_i64(r: &Rational) -> i64 {
    to_i64(&Rational::from(r.ceil_ref()))
}

/// `Psi^W_g` below `q^prec`, computed as `q^-H exp(...)` and checked against
/// the product over the repackaged row `Fcheck_(0,j)`.
pub fn psi_product(w: &WModuleData, class: &str, prec: i64) -> Result<QSeries> {
    let c = w.lookup(class)?;
    let h = class_number_h(w, None)?;
    psi_with_h(w, c, &h, prec)
}

/// Like [`psi_product`] with a class number supplied for `m > 1`.
pub fn psi_product_with(w: &WModuleData, class: &str, plugin: &ClassNumberPlugin, prec: i64) -> Result<QSeries> {
    let c = w.lookup(class)?;
    let h = class_number_h(w, Some(plugin))?;
    psi_with_h(w, c, &h, prec)
}

fn psi_with_h(w: &WModuleData, c: usize, h: &Rational, prec: i64) -> Result<QSeries> {
    let big_r = ceil_i64(&Rational::from(h + prec)).max(1);
    let log = psi_log(w, c, big_r)?;
    let body = log.exp()?;
    let product = dft_product(w, c, big_r)?;
    if product != body.to_cyclotomic_series() {
        return Err(Error::Consistency(format!(
            "exponential and DFT product forms of Psi disagree for class {}",
            w.classes[c].name
        )));
    }
    Ok(body.shift(&Rational::from(-h)).truncate(&Rational::from(prec)))
}

/// `-sum_(n, k) C^W_(g^k)(n^2, n) q^(nk) / k` below `q^big_r`.
fn psi_log(w: &WModuleData, c: usize, big_r: i64) -> Result<QSeries> {
    let mut terms = Vec::new();
    for n in 1..big_r {
        for k in 1..=(big_r - 1) / n {
            let x = w.coeff(w.power_class(c, k as u64), n * n, n)?;
            if x != 0 {
                terms.push((n * k, Rational::from((-x, Integer::from(k)))));
            }
        }
    }
    Ok(QSeries::from_keys(1, terms, Some(big_r)))
}

/// `prod_n prod_(j mod N) (1 - e(j/N) q^n)^(Ccheck_(0,j)(n^2, n))` below `q^big_r`.
fn dft_product(w: &WModuleData, c: usize, big_r: i64) -> Result<QSeries<Cyclotomic>> {
    let fam = w.family(c)?;
    let row = check_row0(&fam);
    let n_level = w.classes[c].level as i64;
    let m4 = 4 * w.index;
    let mut acc = QSeries::<Cyclotomic>::one().truncate_int(big_r);
    for n in 1..big_r {
        let r = n.rem_euclid(2 * w.index);
        for j in 0..n_level {
            let s = &row[&(j, r)];
            let x = s.get(&Rational::from((n * n, m4))).ok_or_else(|| {
                Error::Precision(format!("repackaged coefficient at D = {} is beyond the known range", n * n))
            })?;
            let e = x
                .to_rational()
                .filter(is_integer)
                .ok_or_else(|| Error::InvalidCharacterData(format!("product exponent {x} at n = {n}, j = {j} is not an integer")))?;
            if e == 0 {
                continue;
            }
            let factor = QSeries::binomial(&Cyclotomic::root_of_unity(j, n_level), n, e.numer(), big_r);
            acc = acc.mul(&factor);
        }
    }
    Ok(acc)
}

fn frame_pairs(t: &VirtualModuleTraces) -> Result<Vec<(i64, i64)>> {
    t.frame_shape()?
        .v
        .iter()
        .map(|(&b, v)| {
            let e = Integer::from(v * 2).to_i64().ok_or_else(|| Error::Unsupported(format!("eta exponent {v} is too large")))?;
            Ok((b as i64, e))
        })
        .collect()
}

/// `eta^W_g = prod_b eta(b tau)^(2 v_b(g | W_(0,0)))` below `q^prec`.
pub fn eta_w(w: &WModuleData, class: &str, prec: i64) -> Result<QSeries> {
    let c = w.lookup(class)?;
    eta_at(w, c, &Rational::from(prec))
}

fn eta_at(w: &WModuleData, c: usize, prec: &Rational) -> Result<QSeries> {
    let pairs = frame_pairs(&w.traces(c, 0, 0)?)?;
    if pairs.is_empty() {
        return Ok(QSeries::one().truncate(prec));
    }
    eta_quotient(&eta_spec(&pairs), prec)
}

/// `h = H + dim(W_(0,0)) / 12`, so that `T^W_g = q^-h + ...`.
pub fn leading_h(w: &WModuleData, h: &Rational) -> Result<Rational> {
    let dim = w.coeff(w.identity(), 0, 0)?;
    Ok(Rational::from(h + Rational::from((dim, Integer::from(12)))))
}

/// `T^W_g = Psi^W_g / eta^W_g` below `q^prec`.
pub fn t_w(w: &WModuleData, class: &str, prec: i64) -> Result<QSeries> {
    let c = w.lookup(class)?;
    let h = class_number_h(w, None)?;
    t_with_h(w, c, &h, prec)
}

fn t_with_h(w: &WModuleData, c: usize, h: &Rational, prec: i64) -> Result<QSeries> {
    let hh = leading_h(w, h)?;
    let e_eta = Rational::from(&hh - h);
    let p_psi = ceil_i64(&Rational::from(&e_eta + prec));
    let psi = psi_with_h(w, c, h, p_psi)?;
    let eta = eta_at(w, c, &(Rational::from(&hh + &e_eta) + prec))?;
    let t = psi.div(&eta)?.truncate(&Rational::from(prec));
    match t.leading() {
        Some((e, _)) if e != -hh.clone() && prec > -to_i64(&Rational::from(hh.floor_ref())) => {
            return Err(Error::Consistency(format!("T has leading exponent {e}, expected {}", -hh)));
        }
        _ => {}
    }
    Ok(t)
}

/// The Fock-space traces of `SQ(W)`:
/// `q^-h prod_(n > 0) tr(g | Lambda_(-q^n) U_n) tr(g | Lambda_(-q^n) U_0)` with
/// `U_n = W_(n, n^2/4m)` and `U_0 = -2 W_(0,0)`, below `q^prec`. The result
/// must coincide with [`t_w`].
pub fn sq_traces(w: &WModuleData, class: &str, prec: i64) -> Result<QSeries> {
    let c = w.lookup(class)?;
    let h = class_number_h(w, None)?;
    let fock = fock_traces(w, c, &h, prec)?;
    let t = t_with_h(w, c, &h, prec)?;
    if fock != t {
        return Err(Error::Consistency(format!(
            "Fock-space traces differ from Psi/eta for class {}",
            w.classes[c].name
        )));
    }
    Ok(fock)
}

fn fock_traces(w: &WModuleData, c: usize, h: &Rational, prec: i64) -> Result<QSeries> {
    let hh = leading_h(w, h)?;
    let big_r = ceil_i64(&Rational::from(&hh + prec)).max(1);
    let u0 = w.traces(c, 0, 0)?;
    let u0 = u0.neg().add(&u0.neg())?;
    let mut acc = QSeries::one().truncate_int(big_r);
    for n in 1..big_r {
        let tprec = (big_r + n - 1) / n;
        let un = w.traces(c, n * n, n)?;
        let s = Rational::from(n);
        acc = acc.mul(&lambda_trace(&un, LambdaSign::Exterior, tprec)?.rescale(&s));
        acc = acc.mul(&lambda_trace(&u0, LambdaSign::Exterior, tprec)?.rescale(&s));
    }
    Ok(acc.shift(&Rational::from(-&hh)).truncate(&Rational::from(prec)))
}

/// Graded multiplicities `n -> (irreducible -> m)` of `V = SQ(W)`, where `n`
/// indexes the coefficient of `q^(n - h)`, below `q^prec`.
pub fn sq_decompose(w: &WModuleData, ct: &CharacterTable, prec: i64) -> Result<BTreeMap<i64, BTreeMap<String, Integer>>> {
    let mut idx = Vec::new();
    for (i, cl) in ct.classes().iter().enumerate() {
        let c = w
            .class_index(&cl.name)
            .ok_or_else(|| Error::InvalidCharacterData(format!("character table class {} is not a class of W", cl.name)))?;
        if w.classes[c].order != cl.order {
            return Err(Error::InvalidCharacterData(format!("class {} has different orders", cl.name)));
        }
        for (p, _) in factorize(cl.order) {
            if ct.classes()[ct.power_class(i, p)].name != w.classes[w.power_class(c, p)].name {
                return Err(Error::InvalidCharacterData(format!("power maps of class {} disagree", cl.name)));
            }
        }
        idx.push(c);
    }
    if idx.len() != w.classes.len() {
        return Err(Error::InvalidCharacterData("W has classes missing from the character table".into()));
    }
    let h = class_number_h(w, None)?;
    let hh = leading_h(w, &h)?;
    let series = ct
        .classes()
        .iter()
        .map(|cl| sq_traces(w, &cl.name, prec))
        .collect::<Result<Vec<_>>>()?;
    let mut out = BTreeMap::new();
    let top = ceil_i64(&Rational::from(&hh + prec));
    for n in 0..top {
        let e = Rational::from(n - &hh);
        let vals: Vec<Cyclotomic> = series.iter().map(|s| Cyclotomic::from_rational(s.coeff(&e))).collect();
        out.insert(n, decompose(&vals, ct)?);
    }
    Ok(out)
}

/// `Psi^W_(D1,r1,g) = exp(-sqrt(D1) sum_(n' > 0) sum_(nk = n') (D1|k) C^W_(g^k)(D1 n^2, r1 n) q^(n') / k)`
/// below `q^prec`. For the identity class the result is checked against the
/// product `prod_n prod_(a mod D1) (1 - e(a/D1) q^n)^((D1|a) C(D1 n^2, r1 n))`.
pub fn twisted_psi(w: &WModuleData, class: &str, d1: i64, r1: i64, prec: i64) -> Result<QSeries<Quadratic>> {
    let c = w.lookup(class)?;
    if d1 <= 1 || !is_fundamental(d1) {
        return Err(Error::InvalidInput(format!("D1 = {d1} must be a fundamental discriminant > 1")));
    }
    let m4 = 4 * w.index;
    if (d1 - r1 * r1).rem_euclid(m4) != 0 {
        return Err(Error::InvalidInput(format!("D1 = {d1} is not r1^2 = {} mod {m4}", r1 * r1)));
    }
    let prec = prec.max(1);
    let mut terms = Vec::new();
    for n in 1..prec {
        for k in 1..=(prec - 1) / n {
            let chi = kronecker(d1, k);
            if chi == 0 {
                continue;
            }
            let x = w.coeff(w.power_class(c, k as u64), d1 * n * n, r1 * n)?;
            if x != 0 {
                let b = Rational::from((-x * chi, Integer::from(k)));
                terms.push((n * k, Quadratic::new(d1 as u64, Rational::new(), b)));
            }
        }
    }
    let out = QSeries::from_keys(1, terms, Some(prec)).exp()?;
    if w.classes[c].order == 1 {
        let mut acc = QSeries::<Cyclotomic>::one().truncate_int(prec);
        for n in 1..prec {
            let x = w.coeff(c, d1 * n * n, r1 * n)?;
            if x == 0 {
                continue;
            }
            for a in 0..d1 {
                let e = Integer::from(&x * kronecker(d1, a));
                if e == 0 {
                    continue;
                }
                acc = acc.mul(&QSeries::binomial(&Cyclotomic::root_of_unity(a, d1), n, &e, prec));
            }
        }
        if acc != out.to_cyclotomic_series() {
            return Err(Error::Consistency(format!("twisted product forms disagree for D1 = {d1}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::klein_j;
    use crate::qseries::rational::{int, rat};

    fn j_example(dmax: i64) -> WModuleData {
        let v = json!({"index": 1, "classes": [{"name": "1A", "order": 1, "level": 1, "plus": {"3": 3}}]});
        WModuleData::from_json(&v, dmax).unwrap()
    }

    #[test]
    fn hurwitz_values() {
        assert_eq!(hurwitz(0), rat(-1, 12));
        assert_eq!(hurwitz(3), rat(1, 3));
        assert_eq!(hurwitz(4), rat(1, 2));
        assert_eq!(hurwitz(7), 1);
        assert_eq!(hurwitz(8), 1);
        assert_eq!(hurwitz(12), rat(4, 3));
        assert_eq!(hurwitz(15), 2);
        assert_eq!(hurwitz(16), rat(3, 2));
        assert_eq!(hurwitz(23), 3);
        assert_eq!(hurwitz(5), 0);
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number_h(&j_example(20), None).unwrap(), 1);
        let v = json!({"index": 1, "classes": [{"name": "1A", "order": 1, "plus": {"3": 2}, "theta": 248}]});
        let w = WModuleData::from_json(&v, 40).unwrap();
        assert_eq!(class_number_h(&w, None).unwrap(), -20);
        assert_eq!(weight_k(&w, "1A").unwrap(), 248);
        let z = json!({"index": 1, "classes": [{"name": "1A", "order": 1, "components": {"1": [["1", 1]]}}]});
        assert_eq!(class_number_h(&WModuleData::from_json(&z, 4).unwrap(), None).unwrap(), 0);
        let m2 = json!({"index": 2, "classes": [{"name": "1A", "order": 1,
            "components": {"1": [["-7", 1]], "3": [["-7", 1]]}}]});
        let w2 = WModuleData::from_json(&m2, 4).unwrap();
        assert!(matches!(class_number_h(&w2, None), Err(Error::MissingClassNumber { m: 2, d: -7, r: 1 })));
        let mut p = ClassNumberPlugin::new();
        p.insert(2, -7, 1, rat(1, 2));
        assert_eq!(class_number_h(&w2, Some(&p)).unwrap(), 1);
    }

    #[test]
    fn j_product() {
        let w = j_example(170);
        let psi = psi_product(&w, "1A", 13).unwrap();
        assert_eq!(psi, klein_j(13));
        assert_eq!(psi.coeff_int(2), 21493760);
        assert_eq!(t_w(&w, "1A", 13).unwrap(), psi);
        assert_eq!(sq_traces(&w, "1A", 6).unwrap(), klein_j(6));
        assert_eq!(eta_w(&w, "1A", 6).unwrap(), QSeries::one().truncate_int(6));
    }

    #[test]
    fn theta_family_traces() {
        let v = json!({"index": 1, "classes": [
            {"name": "1A", "order": 1, "powers": {}, "theta": 248},
            {"name": "2A", "order": 2, "level": 2, "powers": {"2": "1A"}, "theta": -8}]});
        let w = WModuleData::from_json(&v, 100).unwrap();
        assert_eq!(weight_k(&w, "2A").unwrap(), 120);
        let eta = eta_w(&w, "2A", 30).unwrap();
        assert_eq!(eta, eta_quotient(&eta_spec(&[(1, -16), (2, 256)]), &int(30)).unwrap());
        for c in ["1A", "2A"] {
            assert_eq!(sq_traces(&w, c, 8).unwrap(), QSeries::one().truncate_int(8));
        }
        let ct = CharacterTable::from_json(&json!({
            "classes": [{"name": "1A", "size": 1, "order": 1}, {"name": "2A", "size": 1, "order": 2, "powers": {"2": "1A"}}],
            "irreducibles": [{"name": "+", "values": {"1A": "1", "2A": "1"}}, {"name": "-", "values": {"1A": "1", "2A": "-1"}}]
        }))
        .unwrap();
        let dec = sq_decompose(&w, &ct, 4).unwrap();
        assert_eq!(dec[&0], BTreeMap::from([("+".to_string(), Integer::from(1)), ("-".to_string(), Integer::new())]));
    }

    #[test]
    fn single_coefficient_fock() {
        let v = json!({"index": 1, "classes": [{"name": "1A", "order": 1,
            "components": {"1": [["1", 1]]}}]});
        let w = WModuleData::from_json(&v, 4).unwrap();
        let t = sq_traces(&w, "1A", 5).unwrap();
        assert_eq!(t, QSeries::from_ints(0, &[1, -1], Some(5)));
    }

    #[test]
    fn twisted_products() {
        let w = j_example(120);
        let t = twisted_psi(&w, "1A", 5, 1, 3).unwrap();
        let c1 = t.coeff_int(1);
        assert_eq!(c1.a(), &Rational::new());
        assert_eq!(c1.b(), &Rational::from(3 * 85995));
        let zero = json!({"index": 1, "classes": [{"name": "1A", "order": 1, "components": {"1": [["-3", 3]]}}]});
        let z = WModuleData::from_json(&zero, 4).unwrap();
        assert_eq!(twisted_psi(&z, "1A", 5, 1, 6).unwrap(), QSeries::one().truncate_int(6));
        assert!(twisted_psi(&w, "1A", 3, 1, 3).is_err());
        assert!(twisted_psi(&w, "1A", 5, 0, 3).is_err());
    }

    #[test]
    fn json_errors() {
        let frac_coeff = json!({"index": 1, "classes": [{"name": "1A", "order": 1, "components": {"1": [["1", "1/2"]]}}]});
        assert!(matches!(WModuleData::from_json(&frac_coeff, 4), Err(Error::InvalidCharacterData(_))));
        let asym = json!({"index": 2, "classes": [{"name": "1A", "order": 1, "components": {"1": [["1", 1]]}}]});
        let e = WModuleData::from_json(&asym, 4).unwrap_err().to_string();
        assert!(e.contains("symmetry"), "{e}");
        let bad_vb = json!({"index": 1, "classes": [
            {"name": "1A", "order": 1, "components": {"0": [["0", 1]]}},
            {"name": "2A", "order": 2, "powers": {"2": "1A"}, "components": {"0": [["0", 0]]}}]});
        assert!(matches!(WModuleData::from_json(&bad_vb, 4), Err(Error::InvalidCharacterData(_))));
        let _ = int(0);
    }
}
