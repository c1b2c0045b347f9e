use std::io::Write;

use modprod::qseries::Coefficient;
use modprod::QSeries;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A coefficient table `label, exponent, coefficient` for CSV export.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub rows: Vec<[String; 3]>,
}

impl Table {
    pub fn push_series<C: Coefficient>(&mut self, label: &str, s: &QSeries<C>) {
        for (e, c) in s.terms() {
            self.rows.push([label.to_string(), e.to_string(), cell(&c.to_json())]);
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub table: Table,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), inputs: Map::new(), outputs: Map::new(), checks: Vec::new(), table: Table::default() }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.to_string(), v.into());
    }

    pub fn output(&mut self, key: &str, v: impl Into<Value>) {
        self.outputs.insert(key.to_string(), v.into());
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
            .collect();
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checks": checks,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }

    pub fn write_json(&self, w: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
        writeln!(w)
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["label", "exponent", "coefficient"])?;
        for row in &self.table.rows {
            out.write_record(row)?;
        }
        out.flush()
    }
}

/// An exact series output: the series itself plus an `exact` flag.
pub fn exact_series<C: Coefficient>(s: &QSeries<C>) -> Value {
    json!({"exact": true, "series": s.to_json()})
}

/// A numeric output as a decimal string with its certified bound.
pub fn numeric(value: String, bound: f64) -> Value {
    json!({"exact": false, "value": value, "±": format!("{bound:.1e}")})
}
