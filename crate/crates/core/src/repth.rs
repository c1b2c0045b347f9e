//! Character-level virtual modules of cyclic groups: eigenvalue multiplicities,
//! Frame shapes, exterior and symmetric power traces, Adams operations, and
//! character tables for decomposing class functions.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Integer, Rational};
use serde_json::{json, Map, Value};

use crate::arith::{divisors, euler_phi, factorize, gcd_u, mobius};
use crate::error::{Error, Result};
use crate::qseries::{Coefficient, Cyclotomic, QSeries};

/// Traces `tr(g^d | U)` for the divisors `d` of `n = o(g)`, all rational integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualModuleTraces {
    order: u64,
    traces: BTreeMap<u64, Integer>,
}

impl VirtualModuleTraces {
    /// Validates that all divisors are present and that the resulting `v_b` are integral.
    pub fn new(order: u64, traces: BTreeMap<u64, Integer>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidCharacterData("element order must be positive".into()));
        }
        for d in divisors(order) {
            if !traces.contains_key(&d) {
                return Err(Error::InvalidCharacterData(format!("missing trace of g^{d}")));
            }
        }
        let t = VirtualModuleTraces { order, traces: traces.into_iter().filter(|(d, _)| order % d == 0).collect() };
        t.frame_shape()?;
        Ok(t)
    }

    /// Traces `tr(g^k | U)` for `k = 0, 1, ..., n - 1`, indexed by `k`.
    pub fn from_sequence(seq: &[i64]) -> Result<Self> {
        let n = seq.len() as u64;
        let traces = divisors(n).into_iter().map(|d| (d, Integer::from(seq[(d % n) as usize]))).collect();
        let t = Self::new(n, traces)?;
        for (k, &x) in seq.iter().enumerate() {
            if *t.trace(k as u64) != x {
                return Err(Error::InvalidCharacterData(format!("trace of g^{k} is not Galois invariant")));
            }
        }
        Ok(t)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn traces(&self) -> &BTreeMap<u64, Integer> {
        &self.traces
    }

    /// `tr(g^k | U)` for any `k >= 0`.
    pub fn trace(&self, k: u64) -> &Integer {
        let g = if k % self.order == 0 { self.order } else { gcd_u(k, self.order) };
        &self.traces[&g]
    }

    pub fn dim(&self) -> &Integer {
        &self.traces[&self.order]
    }

    /// Data for `g^k`, an element of order `n / gcd(n, k)`.
    pub fn power(&self, k: u64) -> VirtualModuleTraces {
        let n2 = self.order / gcd_u(self.order, k);
        let traces = divisors(n2).into_iter().map(|d| (d, self.trace(k * d).clone())).collect();
        VirtualModuleTraces { order: n2, traces }
    }

    /// Traces of the Adams operation: `tr(g | psi^k U) = tr(g^k | U)`, as a
    /// module for the same element `g`.
    pub fn adams(&self, k: u64) -> VirtualModuleTraces {
        let traces = divisors(self.order).into_iter().map(|d| (d, self.trace(k * d).clone())).collect();
        VirtualModuleTraces { order: self.order, traces }
    }

    /// `U' + U''` for data of the same element.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = crate::arith::lcm_u(self.order, other.order);
        let traces = divisors(n).into_iter().map(|d| (d, Integer::from(self.trace(d) + other.trace(d)))).collect();
        Self::new(n, traces)
    }

    pub fn neg(&self) -> Self {
        VirtualModuleTraces { order: self.order, traces: self.traces.iter().map(|(&d, t)| (d, Integer::from(-t))).collect() }
    }

    /// Frame shape: `v_b = (1/b) sum_(d | b) mu(b/d) tr(g^d | U)`.
    pub fn frame_shape(&self) -> Result<FrameShape> {
        let mut v = BTreeMap::new();
        for b in divisors(self.order) {
            let s: Integer = divisors(b).into_iter().map(|d| Integer::from(mobius(b / d) * self.trace(d))).sum();
            if !s.is_divisible_u(b as u32) {
                return Err(Error::InvalidCharacterData(format!("v_{b} = {s}/{b} is not an integer")));
            }
            if s != 0 {
                v.insert(b, s / b);
            }
        }
        Ok(FrameShape { v })
    }

    /// `u_d`: multiplicity of each primitive `d`-th root of unity among the eigenvalues.
    ///
    /// Negative multiplicities are rejected unless `virtual_ok`.
    pub fn eigen_multiplicities(&self, virtual_ok: bool) -> Result<BTreeMap<u64, Integer>> {
        let n = self.order as i64;
        let mut out = BTreeMap::new();
        for d in divisors(self.order) {
            let mut acc = Cyclotomic::zero();
            for k in 0..n {
                let w = Cyclotomic::root_of_unity(-k, d as i64).scale(&Rational::from(self.trace(k as u64)));
                acc = acc.add(&w);
            }
            let u = acc
                .to_rational()
                .map(|r| r / n)
                .filter(|r| *r.denom() == 1)
                .ok_or_else(|| Error::InvalidCharacterData(format!("u_{d} is not an integer")))?;
            let u = u.numer().clone();
            if u < 0 && !virtual_ok {
                return Err(Error::NotVirtualModule(format!("negative multiplicity u_{d} = {u}")));
            }
            out.insert(d, u);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let t: Map<String, Value> = self.traces.iter().map(|(d, x)| (d.to_string(), json!(x.to_string()))).collect();
        json!({ "order": self.order, "traces": t })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let order = v.get("order").and_then(Value::as_u64).ok_or_else(|| Error::Json("needs \"order\"".into()))?;
        let raw = v
            .get("traces")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("needs a \"traces\" object".into()))?;
        let mut traces = BTreeMap::new();
        for (d, x) in raw {
            let d: u64 = d.parse().map_err(|_| Error::Json(format!("bad divisor {d:?}")))?;
            let x = json_integer(x).ok_or_else(|| Error::Json(format!("trace of g^{d} must be an integer")))?;
            traces.insert(d, x);
        }
        Self::new(order, traces)
    }
}

/// `prod_b b^(v_b)`, encoding `tr(g | Lambda_(-t) U) = prod_b (1 - t^b)^(v_b)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrameShape {
    pub v: BTreeMap<u64, Integer>,
}

impl FrameShape {
    pub fn get(&self, b: u64) -> Integer {
        self.v.get(&b).cloned().unwrap_or_default()
    }

    /// `sum_(b | d) b v_b`, which equals `tr(g^d | U)`.
    pub fn degree_at(&self, d: u64) -> Integer {
        self.v.iter().filter(|(b, _)| d % **b == 0).map(|(&b, x)| Integer::from(x * b)).sum()
    }

    /// `prod_b (1 - t^(b))^(v_b)` below `t^prec`.
    pub fn product(&self, prec: i64) -> QSeries {
        let mut acc = QSeries::one().truncate(&Rational::from(prec));
        for (&b, x) in &self.v {
            acc = acc.mul(&QSeries::binomial(&Rational::from(1), b as i64, x, prec));
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let v: Map<String, Value> = self.v.iter().map(|(b, x)| (b.to_string(), json!(x.to_string()))).collect();
        Value::Object(v)
    }
}

impl fmt::Display for FrameShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.v.iter().map(|(b, x)| format!("{b}^{x}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn vb_from_traces(t: &VirtualModuleTraces) -> Result<FrameShape> {
    t.frame_shape()
}

/// `u_d` for a virtual module; negative values allowed.
pub fn ud_from_traces(t: &VirtualModuleTraces) -> Result<BTreeMap<u64, Integer>> {
    let u = t.eigen_multiplicities(true)?;
    let fs = t.frame_shape()?;
    for b in divisors(t.order) {
        let v: Integer = divisors(t.order / b).into_iter().map(|a| Integer::from(mobius(a) * &u[&(a * b)])).sum();
        if v != fs.get(b) {
            return Err(Error::Consistency(format!("v_{b} disagrees with sum mu(a) u_(ab)")));
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSign {
    /// `tr(g | Lambda_(-t) U) = prod (1 - t^b)^(v_b)`.
    Exterior,
    /// `tr(g | S_t U)`, the reciprocal.
    Symmetric,
}

/// The trace series in `t` below `t^prec`, computed as the Frame shape product
/// and checked against `exp(-+ sum_k tr(g^k|U) t^k / k)`.
pub fn lambda_trace(t: &VirtualModuleTraces, sign: LambdaSign, prec: i64) -> Result<QSeries> {
    let fs = t.frame_shape()?;
    let prod = fs.product(prec);
    let prod = match sign {
        LambdaSign::Exterior => prod,
        LambdaSign::Symmetric => prod.inv()?,
    };
    let s = match sign {
        LambdaSign::Exterior => -1,
        LambdaSign::Symmetric => 1,
    };
    let log = QSeries::from_keys(1, (1..prec).map(|k| (k, Rational::from((Integer::from(s * t.trace(k as u64)), Integer::from(k))))), Some(prec));
    let via_exp = log.exp()?;
    if prod != via_exp {
        return Err(Error::Consistency("product and exponential forms of the trace disagree".into()));
    }
    Ok(prod)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMapReport {
    pub p: u64,
    pub failures: Vec<String>,
}

impl PowerMapReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `v_b(g^p) = p v_(bp)(g) + [p does not divide b] v_b(g)` for all `b`,
/// and the closed form for `g^(p^k)`.
pub fn power_map_check(t: &VirtualModuleTraces, p: u64) -> Result<PowerMapReport> {
    if !crate::arith::is_prime(p) || t.order % p != 0 {
        return Err(Error::InvalidInput(format!("{p} is not a prime divisor of {}", t.order)));
    }
    let vg = t.frame_shape()?;
    let mut failures = Vec::new();
    let vp = t.power(p).frame_shape()?;
    for b in 1..=t.order {
        let want = vg.get(b * p) * p + if b % p != 0 { vg.get(b) } else { Integer::new() };
        if vp.get(b) != want {
            failures.push(format!("v_{b}(g^{p}) = {} but the power map gives {want}", vp.get(b)));
        }
    }
    let kmax = factorize(t.order).into_iter().find(|&(q, _)| q == p).map_or(0, |(_, e)| e) + 1;
    for k in 0..=kmax {
        let pk = p.pow(k);
        let vk = t.power(pk).frame_shape()?;
        for b in 1..=t.order {
            let want = if b % p == 0 {
                vg.get(b * pk) * pk
            } else {
                (0..=k).map(|j| vg.get(b * p.pow(j)) * p.pow(j)).sum()
            };
            if vk.get(b) != want {
                failures.push(format!("v_{b}(g^{pk}) = {} but the closed form gives {want}", vk.get(b)));
            }
        }
    }
    Ok(PowerMapReport { p, failures })
}

/// `(1/N) sum_(n | N) phi(N/n) tr(g^n | U)` and `sum_(n | N) v_n(g)`; these always agree.
pub fn weight_identity(t: &VirtualModuleTraces, n: u64) -> Result<(Rational, Rational)> {
    let vg = t.frame_shape()?;
    let lhs: Rational = divisors(n)
        .into_iter()
        .map(|d| Rational::from(t.trace(d) * euler_phi(n / d)))
        .sum::<Rational>()
        / n;
    let rhs = Rational::from(divisors(n).into_iter().map(|d| vg.get(d)).sum::<Integer>());
    if lhs != rhs {
        return Err(Error::Consistency(format!("weight identity fails at N = {n}: {lhs} != {rhs}")));
    }
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub name: String,
    pub size: u64,
    pub order: u64,
    /// Prime power maps; primes prime to the element order fix the class when absent.
    pub powers: BTreeMap<u64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterTable {
    classes: Vec<ClassInfo>,
    irreducibles: Vec<(String, Vec<Cyclotomic>)>,
    group_order: u64,
}

impl CharacterTable {
    /// Validates the power maps and row orthogonality.
    pub fn new(classes: Vec<ClassInfo>, irreducibles: Vec<(String, Vec<Cyclotomic>)>) -> Result<Self> {
        let group_order: u64 = classes.iter().map(|c| c.size).sum();
        let names: Vec<&str> = classes.iter().map(|c| c.name.as_str()).collect();
        for c in &classes {
            for target in c.powers.values() {
                if !names.contains(&target.as_str()) {
                    return Err(Error::InvalidCharacterData(format!("power map of {} names unknown class {target}", c.name)));
                }
            }
        }
        for (name, vals) in &irreducibles {
            if vals.len() != classes.len() {
                return Err(Error::InvalidCharacterData(format!("character {name} has the wrong number of values")));
            }
        }
        let ct = CharacterTable { classes, irreducibles, group_order };
        for (a, (na, _)) in ct.irreducibles.iter().enumerate() {
            for (b, (nb, _)) in ct.irreducibles.iter().enumerate() {
                let ip = ct.inner_product(&ct.irreducibles[a].1, &ct.irreducibles[b].1);
                let want = Cyclotomic::from_rational(Rational::from((a == b) as i64));
                if ip != want {
                    return Err(Error::InvalidCharacterData(format!("characters {na} and {nb} are not orthonormal")));
                }
            }
        }
        Ok(ct)
    }

    /// `Z/n` with classes `g^k` named `"k"` and characters `chi_j(g^k) = e(jk/n)`.
    pub fn cyclic(n: u64) -> Self {
        let classes = (0..n)
            .map(|k| ClassInfo {
                name: k.to_string(),
                size: 1,
                order: n / gcd_u(k, n),
                powers: factorize(n).into_iter().map(|(p, _)| (p, ((k * p) % n).to_string())).collect(),
            })
            .collect();
        let irr = (0..n)
            .map(|j| {
                let vals = (0..n).map(|k| Cyclotomic::root_of_unity((j * k) as i64, n as i64)).collect();
                (format!("chi{j}"), vals)
            })
            .collect();
        Self::new(classes, irr).expect("cyclic character table is valid")
    }

    pub fn s3() -> Self {
        let c = |name: &str, size, order, powers: &[(u64, &str)]| ClassInfo {
            name: name.into(),
            size,
            order,
            powers: powers.iter().map(|&(p, t)| (p, t.to_string())).collect(),
        };
        let classes = vec![
            c("1A", 1, 1, &[(2, "1A"), (3, "1A")]),
            c("2A", 3, 2, &[(2, "1A"), (3, "2A")]),
            c("3A", 2, 3, &[(2, "3A"), (3, "1A")]),
        ];
        Self::new(classes, int_rows(&[("1", &[1, 1, 1]), ("sgn", &[1, -1, 1]), ("2", &[2, 0, -1])]))
            .expect("S3 table is valid")
    }

    pub fn s4() -> Self {
        let c = |name: &str, size, order, powers: &[(u64, &str)]| ClassInfo {
            name: name.into(),
            size,
            order,
            powers: powers.iter().map(|&(p, t)| (p, t.to_string())).collect(),
        };
        let classes = vec![
            c("1A", 1, 1, &[(2, "1A"), (3, "1A")]),
            c("2A", 6, 2, &[(2, "1A"), (3, "2A")]),
            c("2B", 3, 2, &[(2, "1A"), (3, "2B")]),
            c("3A", 8, 3, &[(2, "3A"), (3, "1A")]),
            c("4A", 6, 4, &[(2, "2B"), (3, "4A")]),
        ];
        Self::new(
            classes,
            int_rows(&[
                ("1", &[1, 1, 1, 1, 1]),
                ("sgn", &[1, -1, 1, 1, -1]),
                ("3", &[3, 1, -1, 0, -1]),
                ("3sgn", &[3, -1, -1, 0, 1]),
                ("2", &[2, 0, 2, -1, 0]),
            ]),
        )
        .expect("S4 table is valid")
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn irreducibles(&self) -> &[(String, Vec<Cyclotomic>)] {
        &self.irreducibles
    }

    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    /// Index of the class of `g^k` for `g` in class `c`.
    pub fn power_class(&self, c: usize, k: u64) -> usize {
        let ord = self.classes[c].order;
        let k = k % ord;
        if k == 0 {
            return self.class_index_of_identity();
        }
        let mut cur = c;
        for (p, e) in factorize(k) {
            for _ in 0..e {
                cur = match self.classes[cur].powers.get(&p) {
                    Some(t) => self.class_index(t).unwrap(),
                    None => cur,
                };
            }
        }
        cur
    }

    fn class_index_of_identity(&self) -> usize {
        self.classes.iter().position(|c| c.order == 1).expect("table has an identity class")
    }

    /// `(1/|G|) sum_c |c| f(c) conj(h(c))`.
    pub fn inner_product(&self, f: &[Cyclotomic], h: &[Cyclotomic]) -> Cyclotomic {
        let mut acc = Cyclotomic::zero();
        for ((c, x), y) in self.classes.iter().zip(f).zip(h) {
            acc = acc.add(&x.mul(&y.conj()).scale(&Rational::from(c.size)));
        }
        acc.scale(&Rational::from((1, self.group_order as i64)))
    }

    /// Trace data of an integer-valued class function at class `c`.
    pub fn traces_at(&self, values: &[Cyclotomic], c: usize) -> Result<VirtualModuleTraces> {
        let n = self.classes[c].order;
        let mut traces = BTreeMap::new();
        for d in divisors(n) {
            let v = values[self.power_class(c, d)]
                .to_rational()
                .filter(|r| *r.denom() == 1)
                .ok_or_else(|| Error::InvalidCharacterData(format!("trace at class {} is not an integer", self.classes[c].name)))?;
            traces.insert(d, v.numer().clone());
        }
        VirtualModuleTraces::new(n, traces)
    }

    /// Integer combination of irreducibles.
    pub fn synthesize(&self, mults: &BTreeMap<String, Integer>) -> Vec<Cyclotomic> {
        let mut out = vec![Cyclotomic::zero(); self.classes.len()];
        for (name, vals) in &self.irreducibles {
            let m = mults.get(name).cloned().unwrap_or_default();
            if m != 0 {
                for (o, v) in out.iter_mut().zip(vals) {
                    *o = o.add(&v.scale(&Rational::from(&m)));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                let powers: Map<String, Value> = c.powers.iter().map(|(p, t)| (p.to_string(), json!(t))).collect();
                json!({ "name": c.name, "size": c.size, "order": c.order, "powers": powers })
            })
            .collect();
        let irr: Vec<Value> = self
            .irreducibles
            .iter()
            .map(|(name, vals)| {
                let values: Map<String, Value> =
                    self.classes.iter().zip(vals).map(|(c, v)| (c.name.clone(), v.to_json())).collect();
                json!({ "name": name, "values": values })
            })
            .collect();
        json!({ "classes": classes, "irreducibles": irr })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidCharacterData(s.to_string());
        let raw = v.get("classes").and_then(Value::as_array).ok_or_else(|| bad("needs a \"classes\" array"))?;
        let mut classes = Vec::new();
        for c in raw {
            let name = c.get("name").and_then(Value::as_str).ok_or_else(|| bad("class needs a name"))?;
            let size = c.get("size").and_then(Value::as_u64).ok_or_else(|| bad("class needs a size"))?;
            let order = c.get("order").and_then(Value::as_u64).ok_or_else(|| bad("class needs an order"))?;
            let mut powers = BTreeMap::new();
            if let Some(p) = c.get("powers").and_then(Value::as_object) {
                for (k, t) in p {
                    let k: u64 = k.parse().map_err(|_| bad("power map keys are primes"))?;
                    powers.insert(k, t.as_str().ok_or_else(|| bad("power map targets are class names"))?.to_string());
                }
            }
            classes.push(ClassInfo { name: name.into(), size, order, powers });
        }
        let raw = v.get("irreducibles").and_then(Value::as_array).ok_or_else(|| bad("needs an \"irreducibles\" array"))?;
        let mut irr = Vec::new();
        for x in raw {
            let name = x.get("name").and_then(Value::as_str).ok_or_else(|| bad("character needs a name"))?;
            let vals = x.get("values").and_then(Value::as_object).ok_or_else(|| bad("character needs values"))?;
            let mut row = Vec::new();
            for c in &classes {
                let val = vals.get(&c.name).ok_or_else(|| bad(&format!("{name} lacks a value at {}", c.name)))?;
                row.push(Cyclotomic::from_json(val)?);
            }
            irr.push((name.to_string(), row));
        }
        Self::new(classes, irr)
    }
}

fn json_integer(v: &Value) -> Option<Integer> {
    match v {
        Value::Number(n) => n.as_i64().map(Integer::from),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn int_rows(rows: &[(&str, &[i64])]) -> Vec<(String, Vec<Cyclotomic>)> {
    rows.iter()
        .map(|(n, vals)| (n.to_string(), vals.iter().map(|&x| Cyclotomic::from_rational(Rational::from(x))).collect()))
        .collect()
}

/// Multiplicities `m_chi = <f, chi>` of a class function; they must be integers.
pub fn decompose(class_fn: &[Cyclotomic], ct: &CharacterTable) -> Result<BTreeMap<String, Integer>> {
    if class_fn.len() != ct.classes.len() {
        return Err(Error::InvalidInput("class function must have one value per class".into()));
    }
    let mut out = BTreeMap::new();
    for (name, vals) in &ct.irreducibles {
        let ip = ct.inner_product(class_fn, vals);
        let m = ip
            .to_rational()
            .filter(|r| *r.denom() == 1)
            .ok_or_else(|| Error::NotVirtualModule(format!("multiplicity of {name} is {ip}")))?;
        out.insert(name.clone(), m.numer().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::int;

    fn tr(order: u64, pairs: &[(u64, i64)]) -> VirtualModuleTraces {
        VirtualModuleTraces::new(order, im(pairs)).unwrap()
    }

    fn im(pairs: &[(u64, i64)]) -> BTreeMap<u64, Integer> {
        pairs.iter().map(|&(d, x)| (d, Integer::from(x))).collect()
    }

    fn sm(pairs: &[(&str, i64)]) -> BTreeMap<String, Integer> {
        pairs.iter().map(|&(d, x)| (d.to_string(), Integer::from(x))).collect()
    }

    #[test]
    fn frame_shapes() {
        let reg2 = tr(2, &[(1, 0), (2, 2)]);
        assert_eq!(reg2.frame_shape().unwrap().v, im(&[(2, 1)]));
        let triv = tr(1, &[(1, 5)]);
        assert_eq!(triv.frame_shape().unwrap().v, im(&[(1, 5)]));
        let th = tr(2, &[(1, -8), (2, 248)]);
        let fs = th.frame_shape().unwrap();
        assert_eq!(fs.v, im(&[(1, -8), (2, 128)]));
        assert_eq!(fs.to_string(), "1^-8 2^128");
        assert_eq!(fs.degree_at(2), 248);
        assert!(matches!(
            VirtualModuleTraces::new(2, im(&[(1, 1), (2, 2)])),
            Err(Error::InvalidCharacterData(_))
        ));
    }

    #[test]
    fn eigen_multiplicities() {
        assert_eq!(ud_from_traces(&tr(2, &[(1, 0), (2, 2)])).unwrap(), im(&[(1, 1), (2, 1)]));
        let reg6 = tr(6, &[(1, 0), (2, 0), (3, 0), (6, 6)]);
        assert!(ud_from_traces(&reg6).unwrap().values().all(|u| *u == 1));
        assert_eq!(ud_from_traces(&tr(2, &[(1, -8), (2, 248)])).unwrap(), im(&[(1, 120), (2, 128)]));
        let neg = tr(2, &[(1, 2), (2, 0)]);
        assert!(neg.eigen_multiplicities(false).is_err());
        assert_eq!(neg.eigen_multiplicities(true).unwrap()[&2], -1);
    }

    #[test]
    fn lambda_series() {
        let one = tr(1, &[(1, 1)]);
        assert_eq!(lambda_trace(&one, LambdaSign::Exterior, 6).unwrap(), QSeries::from_ints(0, &[1, -1], Some(6)));
        assert_eq!(lambda_trace(&one, LambdaSign::Symmetric, 6).unwrap(), QSeries::from_ints(0, &[1; 6], Some(6)));
        let reg2 = tr(2, &[(1, 0), (2, 2)]);
        for s in [LambdaSign::Exterior] {
            assert_eq!(lambda_trace(&reg2, s, 8).unwrap(), QSeries::from_ints(0, &[1, 0, -1], Some(8)));
        }
        let a = tr(4, &[(1, -1), (2, -3), (4, 9)]);
        let b = tr(4, &[(1, 2), (2, 0), (4, 4)]);
        let ab = lambda_trace(&a.add(&b).unwrap(), LambdaSign::Exterior, 12).unwrap();
        let prod = lambda_trace(&a, LambdaSign::Exterior, 12).unwrap().mul(&lambda_trace(&b, LambdaSign::Exterior, 12).unwrap());
        assert_eq!(ab, prod);
        let ls = lambda_trace(&a, LambdaSign::Exterior, 12).unwrap().mul(&lambda_trace(&a, LambdaSign::Symmetric, 12).unwrap());
        assert_eq!(ls, QSeries::one().truncate(&Rational::from(12)));
    }

    #[test]
    fn power_maps_and_weights() {
        let reg2 = tr(2, &[(1, 0), (2, 2)]);
        assert!(power_map_check(&reg2, 2).unwrap().passed());
        let reg4 = tr(4, &[(1, 0), (2, 0), (4, 4)]);
        assert!(power_map_check(&reg4, 2).unwrap().passed());
        let th = tr(2, &[(1, -8), (2, 248)]);
        assert!(power_map_check(&th, 2).unwrap().passed());
        assert_eq!(weight_identity(&reg2, 2).unwrap(), (int(1), int(1)));
        assert_eq!(weight_identity(&th, 2).unwrap().0, 120);
        assert_eq!(weight_identity(&th, 1).unwrap().0, -8);
        assert!(power_map_check(&reg2, 3).is_err());
    }

    #[test]
    fn adams_operations() {
        let a = tr(6, &[(1, 0), (2, 2), (3, -3), (6, 5)]);
        for k in 1..=12 {
            let psi = a.adams(k);
            assert_eq!(psi.trace(1), a.trace(k));
        }
    }

    #[test]
    fn decompositions() {
        let c3 = CharacterTable::cyclic(3);
        let reg = vec![int(3), int(0), int(0)].into_iter().map(Cyclotomic::from_rational).collect::<Vec<_>>();
        assert!(decompose(&reg, &c3).unwrap().values().all(|m| *m == 1));
        let c2 = CharacterTable::cyclic(2);
        let v = vec![Cyclotomic::from_rational(int(2)), Cyclotomic::zero()];
        assert_eq!(decompose(&v, &c2).unwrap(), sm(&[("chi0", 1), ("chi1", 1)]));
        let s3 = CharacterTable::s3();
        let mults = sm(&[("1", 2), ("sgn", -3), ("2", 5)]);
        assert_eq!(decompose(&s3.synthesize(&mults), &s3).unwrap(), mults);
        let half = vec![Cyclotomic::from_rational(int(1)), Cyclotomic::zero(), Cyclotomic::zero()];
        assert!(matches!(decompose(&half, &s3), Err(Error::NotVirtualModule(_))));
        let s4 = CharacterTable::s4();
        assert_eq!(CharacterTable::from_json(&s4.to_json()).unwrap(), s4);
        assert_eq!(s4.power_class(4, 2), 2);
        assert_eq!(s4.power_class(4, 3), 4);
    }
}
