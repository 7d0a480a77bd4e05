//! CSV and JSON emission of numeric tables.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// A numeric table with a comment preamble.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Extra header lines (CSV comments; JSON `notes`).
    pub notes: Vec<String>,
    pub units: &'static str,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>, units: &'static str) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
            units,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn number(x: f64) -> Result<Value, CliError> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| CliError::Numeric(format!("non-finite value {x} in output")))
}

pub fn write_csv<W: Write>(table: &Table, params: &RunConfig, mut out: W) -> Result<(), CliError> {
    writeln!(out, "# qle {}", table.command)?;
    for (k, v) in params.pairs() {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "# units: {}", table.units)?;
    for n in &table.notes {
        writeln!(out, "# {n}")?;
    }
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells = row.iter().map(|x| number(*x).map(|v| v.to_string())).collect::<Result<Vec<_>, _>>()?;
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn to_json(table: &Table, params: &RunConfig) -> Result<Value, CliError> {
    let mut p = Map::new();
    p.insert("command".into(), Value::String(table.command.into()));
    for (k, v) in params.pairs() {
        p.insert(k.into(), Value::String(v));
    }
    p.insert("units".into(), Value::String(table.units.into()));
    if !table.notes.is_empty() {
        p.insert(
            "notes".into(),
            Value::Array(table.notes.iter().map(|n| Value::String(n.clone())).collect()),
        );
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (c, x) in table.columns.iter().zip(r) {
                m.insert((*c).into(), number(*x)?);
            }
            Ok(Value::Object(m))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut root = Map::new();
    root.insert("params".into(), Value::Object(p));
    root.insert("rows".into(), Value::Array(rows));
    Ok(Value::Object(root))
}

pub fn write_table<W: Write>(table: &Table, params: &RunConfig, format: Format, mut out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(table, params, out),
        Format::Json => {
            let v = to_json(table, params)?;
            serde_json::to_writer_pretty(&mut out, &v).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("dist", vec!["a", "b"], "natural");
        t.push(vec![1.0, 1e-7]);
        t.push(vec![0.1 + 0.2, -3.5]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut cfg = RunConfig::default();
        cfg.set("seed", "3").unwrap();
        let mut buf = Vec::new();
        write_csv(&sample(), &cfg, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "# qle dist\n# seed = 3\n# units: natural\na,b\n1.0,1e-7\n0.30000000000000004,-3.5\n");
    }

    #[test]
    fn json_numbers_match_csv() {
        let cfg = RunConfig::default();
        let v = to_json(&sample(), &cfg).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows[1]["a"].as_f64().unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(rows[0]["b"].as_f64().unwrap(), 1e-7);
    }

    #[test]
    fn non_finite_is_numeric_error() {
        let mut t = sample();
        t.push(vec![f64::NAN, 0.0]);
        assert!(matches!(to_json(&t, &RunConfig::default()), Err(CliError::Numeric(_))));
    }
}
