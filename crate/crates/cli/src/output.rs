use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::CliError;

pub const TOOL: &str = "nvrelax";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn num_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num_value(*x),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Result of one subcommand: parameters for the header, scalar results and an optional table.
#[derive(Debug, Clone)]
pub struct Report {
    pub subcommand: &'static str,
    pub params: BTreeMap<String, String>,
    pub summary: Map<String, Value>,
    pub table: Option<Table>,
    pub default_format: Format,
}

impl Report {
    pub fn new(
        subcommand: &'static str,
        params: BTreeMap<String, String>,
        default_format: Format,
    ) -> Self {
        Self {
            subcommand,
            params,
            summary: Map::new(),
            table: None,
            default_format,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    fn header_line(&self) -> String {
        let mut s = format!("# {TOOL} {VERSION} | subcommand={}", self.subcommand);
        for (k, v) in &self.params {
            s.push_str(&format!(" | {k}={v}"));
        }
        s
    }

    pub fn render_csv(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        match &self.table {
            Some(t) => {
                for (k, v) in &self.summary {
                    out.push_str(&format!("# {k}={}\n", scalar_text(v)));
                }
                out.push_str(&t.columns.join(","));
                out.push('\n');
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            None => {
                out.push_str("key,value\n");
                for (k, v) in &self.summary {
                    out.push_str(&format!("{k},{}\n", scalar_text(v)));
                }
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut root = Map::new();
        let params: Map<String, Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        root.insert(
            "meta".into(),
            json!({
                "tool": TOOL,
                "version": VERSION,
                "subcommand": self.subcommand,
                "params": params,
            }),
        );
        for (k, v) in &self.summary {
            root.insert(k.clone(), v.clone());
        }
        if let Some(t) = &self.table {
            root.insert("columns".into(), json!(t.columns));
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            root.insert("rows".into(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("json encoding");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::Number(n) => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Explicit path, else `$NVRELAX_OUT_DIR/<subcommand>.<ext>`, else stdout (`None`).
pub fn destination(
    explicit: Option<&PathBuf>,
    subcommand: &str,
    format: Format,
) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.clone());
    }
    std::env::var_os("NVRELAX_OUT_DIR")
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{subcommand}.{}", extension(format))))
}

pub fn emit(text: &str, dest: Option<PathBuf>) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.87), "2.87");
        assert_eq!(fmt_num(1.5e-6), "1.5e-6");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(-3.0e20), "-3e20");
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new(
            "demo",
            BTreeMap::from([("b".into(), "2".into()), ("a".into(), "1".into())]),
            Format::Csv,
        );
        r.set("lift_gauss", json!(12.5));
        let mut t = Table::new(["x", "y"]);
        t.push(vec![1.0.into(), "s".into()]);
        r.table = Some(t);
        let s = r.render_csv();
        assert_eq!(
            s,
            "# nvrelax 0.1.0 | subcommand=demo | a=1 | b=2\n# lift_gauss=12.5\nx,y\n1,s\n"
        );
        let j: Value = serde_json::from_str(&r.render_json()).unwrap();
        assert_eq!(j["meta"]["subcommand"], "demo");
        assert_eq!(j["rows"][0][1], "s");
    }
}
