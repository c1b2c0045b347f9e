use std::fs;
use std::path::Path;

use modprod::arith::{factorize, gcd};
use modprod::borcherds::{
    class_number_h, psi_product, sq_decompose, sq_traces, twisted_psi, weight_k, ClassNumberPlugin, WModuleData,
};
use modprod::heegner::{
    invert_coefficients, reduce_forms, replication_check, trace_singular_moduli, twisted_divisor, DivisorTerm,
};
use modprod::qseries::rational::{format_rational, parse_rational, to_i64};
use modprod::qseries::{delta, eisenstein_e4};
use modprod::repackage::{check_row0, inverse_repackage, repackage_full_with, Completion, EtaSlashEngine, FormFamily};
use modprod::repth::{lambda_trace, power_map_check, weight_identity, CharacterTable, LambdaSign, VirtualModuleTraces};
use modprod::vvforms::{f0, plus_basis};
use modprod::weil::weil_rep;
use modprod::{Error, Rational};
use serde_json::{json, Map, Value};

use crate::report::{exact_series, numeric, Report};
use crate::{Cli, Command, Failure};

type Out = Result<Report, Failure>;

const F3_ANCHORS: [(i64, i64); 6] = [(-3, 1), (1, -248), (4, 26752), (5, -85995), (9, -4096248), (13, -91951146)];
const J_ANCHORS: [(i64, i64); 3] = [(1, 196884), (2, 21493760), (3, 864299970)];
const MAX_DMAX: i64 = 6400;

pub fn run(cli: &Cli) -> Out {
    if cli.digits < 20 {
        return Err(Failure::Input(format!("--digits must be at least 20, got {}", cli.digits)));
    }
    if cli.jobs == 0 {
        return Err(Failure::Input("--jobs must be positive".into()));
    }
    match &cli.command {
        Command::F0 { prec } => cmd_f0(*prec),
        Command::PlusBasis { dmax, prec } => cmd_plus_basis(*dmax, *prec),
        Command::Jproduct { prec } => cmd_jproduct(*prec),
        Command::Weil { m, n, check, matrices } => cmd_weil(*m, *n, *check, *matrices),
        Command::Repackage { input, engine, prec, shifted } => cmd_repackage(input, engine.as_deref(), prec.as_deref(), *shifted),
        Command::FrameShape { input } => cmd_frame_shape(input),
        Command::Classnum { input, plugin, dmax } => cmd_classnum(input, plugin.as_deref(), *dmax),
        Command::Sq { input, prec, character_table, dmax } => cmd_sq(cli, input, *prec, character_table.as_deref(), *dmax),
        Command::Twisted { d1, r1, input, prec, class, dmax } => cmd_twisted(*d1, *r1, input, *prec, class, *dmax),
        Command::Trace { d1, r1, d0, r0, mult, input, invert } => cmd_trace(cli, *d1, *r1, *d0, *r0, *mult, input.as_deref(), *invert),
        Command::Replication { disc, prec } => cmd_replication(cli, *disc, *prec),
        Command::Validate { input, dmax } => cmd_validate(input, *dmax),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn at(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn positive(name: &str, v: i64) -> Result<(), Failure> {
    if v <= 0 {
        return Err(Failure::Input(format!("--{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Builds `W` with plus and theta sources expanded to `dmax` and runs `f`,
/// enlarging `dmax` on precision errors unless it was given explicitly.
fn with_w<T>(
    v: &Value,
    path: &Path,
    dmax: Option<i64>,
    start: i64,
    f: impl Fn(&WModuleData) -> modprod::Result<T>,
) -> Result<(WModuleData, T, i64), Failure> {
    let mut d = dmax.unwrap_or(start.min(MAX_DMAX));
    loop {
        let w = WModuleData::from_json(v, d).map_err(|e| at(path, e))?;
        match f(&w) {
            Err(Error::Precision(_)) if dmax.is_none() && d < MAX_DMAX => d = (4 * d).min(MAX_DMAX),
            r => return r.map(|t| (w, t, d)).map_err(Failure::from),
        }
    }
}

fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

fn cmd_f0(prec: i64) -> Out {
    positive("prec", prec)?;
    let f = f0(prec)?;
    let mut r = Report::new("f0");
    r.input("prec", prec);
    r.output("f3", exact_series(&f.series));
    r.table.push_series("f3", &f.series);
    let mut bad = Vec::new();
    for (n, c) in F3_ANCHORS.iter().filter(|(n, _)| *n < prec) {
        if f.coeff(*n) != *c {
            bad.push(format!("q^{n}: {} != {c}", f.coeff(*n)));
        }
    }
    r.check("f3 anchor coefficients", bad.is_empty(), bad.join("; "));
    Ok(r)
}

fn cmd_plus_basis(dmax: i64, prec: i64) -> Out {
    positive("prec", prec)?;
    let basis = plus_basis(dmax, prec)?;
    let mut r = Report::new("plus-basis");
    r.input("dmax", dmax);
    r.input("prec", prec);
    r.output("basis", Value::Array(basis.iter().map(|f| f.to_json()).collect()));
    for f in &basis {
        r.table.push_series(&format!("f{}", f.d), &f.series);
    }
    let echelon = basis.iter().all(|f| {
        f.coeff(-f.d) == 1 && basis.iter().all(|g| g.d == f.d || f.coeff(-g.d) == 0)
    });
    r.check("echelon principal parts", echelon, format!("{} forms", basis.len()));
    Ok(r)
}

fn j_module(dmax: i64) -> modprod::Result<WModuleData> {
    WModuleData::from_json(&json!({"index": 1, "classes": [{"name": "1A", "order": 1, "plus": {"3": 3}}]}), dmax)
}

fn cmd_jproduct(prec: i64) -> Out {
    positive("prec", prec)?;
    let w = j_module((prec + 1) * (prec + 1) + 1)?;
    let psi = psi_product(&w, "1A", prec)?;
    let e4 = eisenstein_e4(prec + 2);
    let j = e4.mul(&e4).mul(&e4).div(&delta(prec + 2))?.truncate_int(prec);
    let mut r = Report::new("jproduct");
    r.input("prec", prec);
    let exps: Map<String, Value> = (1..prec)
        .map(|n| Ok((n.to_string(), Value::String(w.coeff(0, n * n, n % 2)?.to_string()))))
        .collect::<modprod::Result<_>>()?;
    r.output("exponents", exps);
    r.output("class_number", format_rational(&class_number_h(&w, None)?));
    r.output("product", exact_series(&psi));
    r.table.push_series("product", &psi);
    r.check("product equals E4^3/Delta", psi == j, format!("compared below q^{prec}"));
    let mut bad = Vec::new();
    for (n, c) in J_ANCHORS.iter().filter(|(n, _)| *n < prec) {
        if psi.coeff_int(*n) != *c {
            bad.push(format!("q^{n}: {}", psi.coeff_int(*n)));
        }
    }
    r.check("j anchor coefficients", bad.is_empty(), bad.join("; "));
    Ok(r)
}

fn cmd_weil(m: i64, n: u64, check: bool, matrices: bool) -> Out {
    let rep = weil_rep(m, n)?;
    let mut r = Report::new("weil");
    r.input("m", m);
    r.input("N", n);
    r.output("dimension", rep.dim());
    r.output("phase_order", rep.phase_order());
    if matrices {
        r.output("representation", rep.to_json());
    }
    if check {
        let rel = rep.check_relations();
        for c in &rel.checks {
            r.check(c.name, c.passed, c.detail.clone());
        }
    }
    Ok(r)
}

fn cmd_repackage(input: &Path, engine: Option<&Path>, prec: Option<&str>, shifted: bool) -> Out {
    let fam = FormFamily::from_json(&read_json(input)?).map_err(|e| at(input, e))?;
    let prec = match prec {
        Some(s) => parse_rational(s)?,
        None => fam
            .members()
            .filter_map(|(_, f)| f.truncation())
            .min()
            .ok_or_else(|| Failure::Input("family is exact; pass --prec".into()))?,
    };
    if prec <= 0 {
        return Err(Failure::Input(format!("--prec must be positive, got {prec}")));
    }
    let n = fam.level() as i64;
    let mut r = Report::new("repackage");
    r.input("family", input.display().to_string());
    r.input("prec", format_rational(&prec));
    match engine {
        Some(path) => {
            let eng = EtaSlashEngine::from_json(&read_json(path)?).map_err(|e| at(path, e))?;
            r.input("engine", path.display().to_string());
            match eng.verify(&fam) {
                Ok(()) => r.check("engine matches family", true, ""),
                Err(Error::Consistency(m)) => r.check("engine matches family", false, m),
                Err(e) => return Err(at(path, e)),
            }
            let how = if shifted { Completion::Shifted } else { Completion::Smallest };
            let check = repackage_full_with(&fam, &eng, &prec, how)?;
            let back = inverse_repackage(&check);
            let mut round_trip = true;
            for j in 0..n {
                let member = fam.member(gcd(j, n) as u64);
                for (rr, s) in back.get(0, j).iter().enumerate() {
                    round_trip &= *s == member.component(rr as i64).truncate(&prec).to_cyclotomic_series();
                }
            }
            r.check("inverse repackaging recovers the family", round_trip, "");
            for ((i, j, rr), s) in check.components() {
                r.table.push_series(&format!("({i},{j},{rr})"), s);
            }
            r.output("check", check.to_json());
        }
        None => {
            let rows = check_row0(&fam);
            let mut out = Map::new();
            for ((j, rr), s) in &rows {
                let s = s.truncate(&prec);
                r.table.push_series(&format!("(0,{j},{rr})"), &s);
                out.insert(format!("(0,{j},{rr})"), exact_series(&s));
            }
            r.output("row0", out);
        }
    }
    Ok(r)
}

fn cmd_frame_shape(input: &Path) -> Out {
    let t = VirtualModuleTraces::from_json(&read_json(input)?).map_err(|e| at(input, e))?;
    let fs = t.frame_shape()?;
    let mut r = Report::new("frame-shape");
    r.input("traces", t.to_json());
    r.output("frame_shape", fs.to_string());
    r.output("v", fs.to_json());
    r.output("dimension", t.dim().to_string());
    match weight_identity(&t, t.order()) {
        Ok((k, _)) => r.check("weight identity", true, format!("weight {k}")),
        Err(Error::Consistency(m)) => r.check("weight identity", false, m),
        Err(e) => return Err(e.into()),
    }
    for (p, _) in factorize(t.order()) {
        let rep = power_map_check(&t, p)?;
        r.check(&format!("power map p = {p}"), rep.passed(), rep.failures.join("; "));
    }
    match lambda_trace(&t, LambdaSign::Exterior, 12) {
        Ok(s) => {
            r.output("exterior_trace", exact_series(&s));
            r.table.push_series("exterior", &s);
            r.check("product and exponential forms agree", true, "below t^12");
        }
        Err(Error::Consistency(m)) => r.check("product and exponential forms agree", false, m),
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

fn identity_dim(w: &WModuleData) -> modprod::Result<Rational> {
    Ok(Rational::from(w.coeff(w.identity(), 0, 0)?))
}

fn cmd_classnum(input: &Path, plugin: Option<&Path>, dmax: Option<i64>) -> Out {
    let v = read_json(input)?;
    let plugin = match plugin {
        Some(p) => Some(ClassNumberPlugin::from_json(&read_json(p)?).map_err(|e| at(p, e))?),
        None => None,
    };
    let (w, h, d) = with_w(&v, input, dmax, 40, |w| class_number_h(w, plugin.as_ref()))?;
    let mut r = Report::new("classnum");
    r.input("input", input.display().to_string());
    r.input("dmax", d);
    r.output("H", format_rational(&h));
    let lead = Rational::from(&h + identity_dim(&w)? / 12);
    r.output("h", format_rational(&lead));
    let mut weights = Map::new();
    for c in w.classes() {
        match weight_k(&w, &c.name) {
            Ok(k) => {
                weights.insert(c.name.clone(), Value::String(format_rational(&k)));
                r.check(&format!("weight identity for {}", c.name), true, "");
            }
            Err(Error::Consistency(m)) => r.check(&format!("weight identity for {}", c.name), false, m),
            Err(e) => return Err(e.into()),
        }
    }
    r.output("weights", weights);
    Ok(r)
}

fn cmd_sq(cli: &Cli, input: &Path, prec: i64, ct: Option<&Path>, dmax: Option<i64>) -> Out {
    positive("prec", prec)?;
    let v = read_json(input)?;
    let ct = match ct {
        Some(p) => Some(CharacterTable::from_json(&read_json(p)?).map_err(|e| at(p, e))?),
        None => None,
    };
    let (w, traces, d) = with_w(&v, input, dmax, (prec + 8) * (prec + 8), |w| {
        let names: Vec<String> = w.classes().iter().map(|c| c.name.clone()).collect();
        par_map(&names, cli.jobs, |c| sq_traces(w, c, prec)).into_iter().collect::<modprod::Result<Vec<_>>>()
    })?;
    let h = class_number_h(&w, None)?;
    let lead = Rational::from(&h + identity_dim(&w)? / 12);
    let mut r = Report::new("sq");
    r.input("input", input.display().to_string());
    r.input("prec", prec);
    r.input("dmax", d);
    r.output("h", format_rational(&lead));
    let mut out = Map::new();
    for (c, s) in w.classes().iter().zip(&traces) {
        out.insert(c.name.clone(), exact_series(s));
        r.table.push_series(&c.name, s);
    }
    r.output("traces", out);
    r.check("Fock traces equal Psi/eta", true, format!("{} classes below q^{prec}", traces.len()));
    if let Some(ct) = ct {
        let dec = sq_decompose(&w, &ct, prec)?;
        let dec: Map<String, Value> = dec
            .into_iter()
            .map(|(n, m)| {
                let m: Map<String, Value> = m.into_iter().map(|(k, x)| (k, Value::String(x.to_string()))).collect();
                (n.to_string(), Value::Object(m))
            })
            .collect();
        r.output("decomposition", dec);
        r.check("integral decomposition", true, "");
    }
    Ok(r)
}

fn cmd_twisted(d1: i64, r1: i64, input: &Path, prec: i64, class: &str, dmax: Option<i64>) -> Out {
    positive("prec", prec)?;
    let v = read_json(input)?;
    let (_, s, d) = with_w(&v, input, dmax, (prec + 4) * (prec + 4) * d1.max(1), |w| twisted_psi(w, class, d1, r1, prec))?;
    let mut r = Report::new("twisted");
    r.input("input", input.display().to_string());
    r.input("D1", d1);
    r.input("r1", r1);
    r.input("class", class);
    r.input("prec", prec);
    r.input("dmax", d);
    r.output("product", exact_series(&s));
    r.table.push_series("product", &s);
    Ok(r)
}

fn singular_terms(v: &Value, path: &Path) -> Result<Vec<DivisorTerm>, Failure> {
    let w = WModuleData::from_json(v, 40).map_err(|e| at(path, e))?;
    if w.index() != 1 {
        return Err(Failure::Input(format!("{}: traces of singular moduli need index 1", path.display())));
    }
    let mut terms = Vec::new();
    for (r, s) in w.classes()[w.identity()].form.components() {
        for (e, c) in s.terms() {
            if e >= 0 {
                break;
            }
            let mult = c.numer().to_i64().ok_or_else(|| Failure::Input("singular coefficient out of range".into()))?;
            terms.push(DivisorTerm { d: to_i64(&Rational::from(&e * 4)), r, mult });
        }
    }
    Ok(terms)
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    cli: &Cli,
    d1: i64,
    r1: i64,
    d0: Option<i64>,
    r0: Option<i64>,
    mult: i64,
    input: Option<&Path>,
    invert: Option<i64>,
) -> Out {
    let mut r = Report::new("trace");
    let spec = match (input, d0) {
        (Some(p), _) => {
            r.input("input", p.display().to_string());
            singular_terms(&read_json(p)?, p)?
        }
        (None, Some(d)) => vec![DivisorTerm { d, r: r0.unwrap_or(d.rem_euclid(2)), mult }],
        (None, None) => return Err(Failure::Input("pass --D0 or --input".into())),
    };
    r.input("D1", d1);
    r.input("r1", r1);
    r.input("digits", cli.digits);
    r.input("divisor", spec.iter().map(|t| json!({"D": t.d, "r": t.r, "mult": t.mult})).collect::<Vec<_>>());
    let mut points = Vec::new();
    for t in &spec {
        for p in twisted_divisor(1, d1, r1, t.d, t.r, t.mult)?.points {
            points.push(json!({"form": p.form.to_string(), "weight": format_rational(&p.weight), "point": p.point.to_string()}));
        }
    }
    r.output("points", points);
    let t = trace_singular_moduli(d1, r1, &spec, cli.digits)?;
    r.output("trace", numeric(t.to_decimal(), t.bound));
    if let Some(nmax) = invert {
        positive("invert", nmax)?;
        let inv = invert_coefficients(d1, r1, &spec, nmax, cli.digits)?;
        let worst = inv.iter().map(|c| c.residue).fold(0.0, f64::max);
        r.output(
            "coefficients",
            inv.iter()
                .map(|c| json!({"n": c.n, "D": d1 * c.n * c.n, "r": r1 * c.n, "value": c.value.to_string(), "residue": format!("{:.1e}", c.residue)}))
                .collect::<Vec<_>>(),
        );
        r.check("rounding residues below 1e-3", worst < 1e-3, format!("max residue {worst:.1e}"));
    }
    Ok(r)
}

fn cmd_replication(cli: &Cli, disc: i64, prec: i64) -> Out {
    positive("prec", prec)?;
    let forms = reduce_forms(disc)?;
    let reports = par_map(&forms, cli.jobs, |q| replication_check(q, prec, cli.digits));
    let mut r = Report::new("replication");
    r.input("disc", disc);
    r.input("prec", prec);
    r.input("digits", cli.digits);
    let mut out = Vec::new();
    for rep in reports {
        let rep = rep?;
        let rows: Vec<Value> = rep
            .rows
            .iter()
            .map(|row| json!({"order": row.order, "lhs": row.lhs.to_string(), "rhs": row.rhs.to_string(), "error": format!("{:.1e}", row.error)}))
            .collect();
        let detail = match rep.first_failure {
            Some(o) => format!("first mismatch at q^{o}"),
            None => format!("tolerance {:.1e}", rep.tolerance),
        };
        r.check(&format!("replication at {}", rep.form), rep.passed(), detail);
        out.push(json!({"form": rep.form.to_string(), "rows": rows}));
    }
    r.output("forms", out);
    Ok(r)
}

fn check_name(msg: &str) -> &'static str {
    if msg.contains("symmetry") {
        "symmetry"
    } else if msg.contains("v_") || msg.contains("u_") {
        "v_b integrality"
    } else if msg.contains("power map") || msg.contains("-power") {
        "power-map closure"
    } else if msg.contains("not an integer") || msg.contains("rational") {
        "rationality"
    } else {
        "schema"
    }
}

fn cmd_validate(input: &Path, dmax: Option<i64>) -> Out {
    let v = read_json(input)?;
    let mut r = Report::new("validate");
    r.input("input", input.display().to_string());
    let fail = |e: Error| {
        let msg = e.to_string();
        Failure::Input(format!("{}: {} check failed: {msg}", input.display(), check_name(&msg)))
    };
    let has = |k: &str| v.get(k).is_some();
    let (kind, names): (&str, &[&str]) = if has("classes") && has("index") {
        let w = WModuleData::from_json(&v, dmax.unwrap_or(40)).map_err(fail)?;
        w.check_traces().map_err(fail)?;
        ("w-module", &["schema", "rationality", "symmetry", "power-map closure", "v_b integrality"])
    } else if has("irreducibles") {
        CharacterTable::from_json(&v).map_err(fail)?;
        ("character-table", &["schema", "orthonormality"])
    } else if has("order") && has("traces") {
        VirtualModuleTraces::from_json(&v).map_err(fail)?;
        ("traces", &["schema", "v_b integrality"])
    } else if has("N") && has("members") {
        FormFamily::from_json(&v).map_err(fail)?;
        ("family", &["schema", "symmetry"])
    } else if has("members") {
        let eng = EtaSlashEngine::from_json(&v).map_err(fail)?;
        for (d, m) in &eng.members {
            m.expand(1, &Rational::from(2)).map_err(|e| Failure::Input(format!("{}: member {d}: {e}", input.display())))?;
        }
        ("engine", &["schema"])
    } else if has("values") && has("m") {
        ClassNumberPlugin::from_json(&v).map_err(fail)?;
        ("class-numbers", &["schema"])
    } else {
        return Err(Failure::Input(format!("{}: unrecognised input kind", input.display())));
    };
    r.output("kind", kind);
    for n in names {
        r.check(n, true, "");
    }
    Ok(r)
}
