//! Run reports and their human, JSON and CSV renderings.
//!
//! Machine formats print every float with 17 significant digits and never
//! include timing, so identical runs give byte-identical output.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Where a reported number comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Input,
    /// A closed-form expression, labelled by what it computes.
    ClosedForm(&'static str),
    /// Independent numerical quadrature of the defining integral.
    Oracle,
    /// Quotient search or sampling.
    Empirical,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Input => f.write_str("input"),
            Provenance::ClosedForm(label) => write!(f, "closed-form:{label}"),
            Provenance::Oracle => f.write_str("oracle:quadrature"),
            Provenance::Empirical => f.write_str("empirical"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// An inequality or agreement test. Only asserted checks affect the exit
/// status; the others are reported for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    /// The fully defaulted scenario, re-parseable as input.
    pub scenario: Value,
    pub quantities: Vec<Quantity>,
    pub tables: Vec<Table>,
    /// Structured results such as search witnesses.
    pub objects: Map<String, Value>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    error_status: Status,
    /// Shown in human output only.
    pub wall_time: Option<Duration>,
}

/// Process exit status for a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// An asserted bound or agreement check failed, or a computation could
    /// not meet its tolerance.
    Violation,
    /// The input was malformed or outside the hypotheses.
    InputError,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::InputError => 2,
        }
    }

    pub fn worst(self, other: Status) -> Status {
        if self.code() >= other.code() {
            self
        } else {
            other
        }
    }
}

/// Whether an error stems from the input rather than from the computation.
pub fn is_input_error(e: &Error) -> bool {
    !matches!(e, Error::ToleranceNotMet { .. } | Error::Divergence(_))
}

impl Report {
    pub fn new(command: &str, scenario: Value) -> Self {
        Report {
            command: command.to_string(),
            scenario,
            quantities: Vec::new(),
            tables: Vec::new(),
            objects: Map::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            notes: Vec::new(),
            error: None,
            error_status: Status::Ok,
            wall_time: None,
        }
    }

    pub fn failed(command: &str, scenario: Value, error: &Error) -> Self {
        let mut r = Report::new(command, scenario);
        r.error = Some(error.to_string());
        r.error_status = if is_input_error(error) {
            Status::InputError
        } else {
            Status::Violation
        };
        r
    }

    pub fn quantity(&mut self, name: &str, value: f64, provenance: Provenance) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            provenance,
            error: None,
        });
    }

    pub fn quantity_with_error(
        &mut self,
        name: &str,
        value: f64,
        provenance: Provenance,
        error: f64,
    ) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            provenance,
            error: Some(error),
        });
    }

    pub fn check(&mut self, name: &str, holds: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            holds,
            detail,
            asserted: true,
        });
    }

    pub fn observe(&mut self, name: &str, holds: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            holds,
            detail,
            asserted: false,
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities
            .iter()
            .find(|q| q.name == name)
            .map(|q| q.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn status(&self) -> Status {
        if self.error.is_some() {
            return self.error_status;
        }
        if self.checks.iter().any(|c| c.asserted && !c.holds) {
            Status::Violation
        } else {
            Status::Ok
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Format::Human),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Scenario(format!(
                "unknown format {s:?}; expected human, json or csv"
            ))),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn machine_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn human_float(v: f64) -> String {
    if !v.is_finite() {
        return machine_float(v);
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        let digits = 11 - a.log10().floor().max(-5.0) as i32;
        let s = format!("{v:.*}", digits.max(0) as usize);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.11e}")
    }
}

fn float_value(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(machine_float(v)), Value::Number)
}

fn cell_value(c: &Cell) -> Value {
    match c {
        Cell::Num(v) => float_value(*v),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Bool(b) => Value::Bool(*b),
    }
}

impl Report {
    /// The machine-readable document; no timing.
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("scenario".into(), self.scenario.clone());
        if let Some(e) = &self.error {
            m.insert("error".into(), Value::String(e.clone()));
        }
        let quantities = self
            .quantities
            .iter()
            .map(|q| {
                let mut o = Map::new();
                o.insert("name".into(), Value::String(q.name.clone()));
                o.insert("value".into(), float_value(q.value));
                o.insert("provenance".into(), Value::String(q.provenance.to_string()));
                if let Some(err) = q.error {
                    o.insert("error".into(), float_value(err));
                }
                Value::Object(o)
            })
            .collect();
        m.insert("quantities".into(), Value::Array(quantities));
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut o = Map::new();
                o.insert("name".into(), Value::String(t.name.clone()));
                o.insert(
                    "columns".into(),
                    Value::Array(t.columns.iter().cloned().map(Value::String).collect()),
                );
                o.insert(
                    "rows".into(),
                    Value::Array(
                        t.rows
                            .iter()
                            .map(|r| Value::Array(r.iter().map(cell_value).collect()))
                            .collect(),
                    ),
                );
                Value::Object(o)
            })
            .collect();
        m.insert("tables".into(), Value::Array(tables));
        if !self.objects.is_empty() {
            m.insert("objects".into(), Value::Object(self.objects.clone()));
        }
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let mut o = Map::new();
                o.insert("name".into(), Value::String(c.name.clone()));
                o.insert("holds".into(), Value::Bool(c.holds));
                o.insert("asserted".into(), Value::Bool(c.asserted));
                o.insert("detail".into(), Value::String(c.detail.clone()));
                Value::Object(o)
            })
            .collect();
        m.insert("checks".into(), Value::Array(checks));
        m.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().cloned().map(Value::String).collect()),
        );
        m.insert(
            "notes".into(),
            Value::Array(self.notes.iter().cloned().map(Value::String).collect()),
        );
        m.insert("status".into(), Value::from(self.status().code()));
        Value::Object(m)
    }
}

/// Pretty JSON with every float written as `{:.16e}`.
pub fn write_json(v: &Value) -> String {
    let mut out = String::new();
    write_json_into(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_json_into(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&machine_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            // rows of scalars stay on one line
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_json_into(out, i, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json_into(out, i, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (k, (key, val)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_json_into(out, val, indent + 1);
                out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn paint(color: bool, code: &str, text: &str) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn human_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => human_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn write_human(report: &Report, color: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}",
        paint(color, "1", &format!("== {} ==", report.command))
    );
    let _ = writeln!(out, "scenario: {}", report.scenario);
    if let Some(e) = &report.error {
        let _ = writeln!(out, "{} {e}", paint(color, "31;1", "error:"));
    }
    if !report.quantities.is_empty() {
        let width = report
            .quantities
            .iter()
            .map(|q| q.name.len())
            .max()
            .unwrap_or(0);
        out.push('\n');
        for q in &report.quantities {
            let err = q
                .error
                .map(|e| format!("  ± {}", human_float(e)))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:width$}  {:>22}  [{}]{err}",
                q.name,
                human_float(q.value),
                q.provenance
            );
        }
    }
    for t in &report.tables {
        let cells: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| r.iter().map(human_cell).collect())
            .collect();
        let widths: Vec<usize> = (0..t.columns.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([t.columns[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let _ = writeln!(out, "\n  {}:", t.name);
        let header: Vec<String> = t
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "    {}", header.join("  "));
        for r in &cells {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(out, "    {}", line.join("  "));
        }
    }
    if !report.objects.is_empty() {
        out.push('\n');
        for (k, v) in &report.objects {
            let _ = writeln!(out, "  {k}: {v}");
        }
    }
    if !report.checks.is_empty() {
        out.push('\n');
        for c in &report.checks {
            let tag = match (c.asserted, c.holds) {
                (true, true) => paint(color, "32", "PASS"),
                (true, false) => paint(color, "31;1", "FAIL"),
                (false, true) => paint(color, "36", "info"),
                (false, false) => paint(color, "33", "info"),
            };
            let _ = writeln!(out, "  {tag}  {}: {}", c.name, c.detail);
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "  {} {w}", paint(color, "33", "warning:"));
    }
    for n in &report.notes {
        let _ = writeln!(out, "  note: {n}");
    }
    if let Some(t) = report.wall_time {
        let _ = writeln!(out, "\nwall time: {:.3} s", t.as_secs_f64());
    }
    out
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => machine_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

/// Tables as CSV blocks separated by blank lines; reports without tables
/// list their quantities instead.
fn write_csv(report: &Report) -> Result<String> {
    let io = |e: csv::Error| Error::Scenario(format!("csv output: {e}"));
    let mut blocks = Vec::new();
    let mut emit = |header: Vec<String>, rows: Vec<Vec<String>>| -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Scenario(format!("csv output: {e}")))?;
        blocks.push(String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(())
    };
    if report.tables.is_empty() {
        let rows = report
            .quantities
            .iter()
            .map(|q| {
                vec![
                    q.name.clone(),
                    machine_float(q.value),
                    q.provenance.to_string(),
                    q.error.map(machine_float).unwrap_or_default(),
                ]
            })
            .collect();
        emit(
            ["name", "value", "provenance", "error"]
                .map(String::from)
                .to_vec(),
            rows,
        )?;
    } else {
        for t in &report.tables {
            emit(
                t.columns.clone(),
                t.rows
                    .iter()
                    .map(|r| r.iter().map(csv_cell).collect())
                    .collect(),
            )?;
        }
    }
    Ok(blocks.join("\n"))
}

pub fn emit(report: &Report, format: Format, color: bool) -> Result<String> {
    match format {
        Format::Human => Ok(write_human(report, color)),
        Format::Json => Ok(write_json(&report.to_value())),
        Format::Csv => write_csv(report),
    }
}

/// Renders several reports: a JSON array, or concatenated blocks.
pub fn emit_all(reports: &[Report], format: Format, color: bool) -> Result<String> {
    match format {
        Format::Json => Ok(write_json(&Value::Array(
            reports.iter().map(Report::to_value).collect(),
        ))),
        _ => {
            let parts = reports
                .iter()
                .map(|r| emit(r, format, color))
                .collect::<Result<Vec<_>>>()?;
            Ok(parts.join("\n"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("sharpness", serde_json::json!({"command": "sharpness"}));
        r.quantity("z", 1.0 / 3.0, Provenance::ClosedForm("upper-constant"));
        let mut t = Table::new("profile", &["p", "ratio", "z", "lower37"]);
        t.push(vec![1.5.into(), 0.25.into(), 0.5.into(), 0.125.into()]);
        r.tables.push(t);
        r.check("sandwich", true, "0.125 <= 0.25 <= 0.5".into());
        r
    }

    #[test]
    fn machine_floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, f64::MIN_POSITIVE, 1.0] {
            assert_eq!(machine_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(machine_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_header_is_the_table_header() {
        let s = emit(&sample(), Format::Csv, false).unwrap();
        assert!(s.starts_with("p,ratio,z,lower37\n"), "{s}");
        assert_eq!(s.lines().count(), 2);
    }

    #[test]
    fn json_uses_seventeen_digits_and_omits_timing() {
        let mut r = sample();
        r.wall_time = Some(Duration::from_millis(1234));
        let s = emit(&r, Format::Json, false).unwrap();
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        assert!(!s.contains("wall"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["quantities"][0]["value"].as_f64(), Some(1.0 / 3.0));
    }

    #[test]
    fn human_output_shows_timing_and_no_color_when_disabled() {
        let mut r = sample();
        r.wall_time = Some(Duration::from_millis(1234));
        let s = emit(&r, Format::Human, false).unwrap();
        assert!(s.contains("wall time: 1.234 s"));
        assert!(!s.contains('\x1b'));
        assert!(emit(&r, Format::Human, true).unwrap().contains('\x1b'));
    }

    #[test]
    fn failed_assertion_sets_violation_status() {
        let mut r = sample();
        assert_eq!(r.status(), Status::Ok);
        r.observe("trend", false, String::new());
        assert_eq!(r.status(), Status::Ok);
        r.check("bound", false, String::new());
        assert_eq!(r.status(), Status::Violation);
    }

    #[test]
    fn human_floats_are_compact() {
        assert_eq!(human_float(1.5), "1.5");
        assert_eq!(human_float(0.0), "0");
        assert_eq!(human_float(1e-9), "1.00000000000e-9");
    }
}
