use std::collections::BTreeMap;
use std::fmt::Write as _;

use dkp_aim::BigReal;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Decimals printed by the table format unless overridden.
pub const TABLE_DECIMALS: usize = 6;

/// One value of a report. Numbers are kept exact until rendering.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(BigReal),
    /// Small quantities (residuals, deviations): scientific in tables.
    Sci(BigReal),
    Float(f64),
    SciFloat(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn opt_real(v: Option<&BigReal>) -> Self {
        v.map_or(Cell::Missing, |v| Cell::Real(v.clone()))
    }

    pub fn opt_sci(v: Option<&BigReal>) -> Self {
        v.map_or(Cell::Missing, |v| Cell::Sci(v.clone()))
    }

    pub fn opt_int(v: Option<usize>) -> Self {
        v.map_or(Cell::Missing, |v| Cell::Int(v as i64))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    /// Full-precision decimal text; `None` for a missing value.
    fn exact(&self) -> Option<String> {
        match self {
            Cell::Real(v) | Cell::Sci(v) => Some(v.to_decimal_string()),
            Cell::Float(v) | Cell::SciFloat(v) => Some(format!("{v:e}")),
            Cell::Int(v) => Some(v.to_string()),
            Cell::Text(s) => Some(s.clone()),
            Cell::Missing => None,
        }
    }

    fn fixed(&self, decimals: usize) -> String {
        match self {
            Cell::Real(v) => v.to_fixed(decimals),
            Cell::Float(v) => format!("{v:.decimals$}"),
            Cell::Sci(v) => v.to_sci_string(3),
            Cell::SciFloat(v) => format!("{v:.2e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "-".into(),
        }
    }
}

impl From<BigReal> for Cell {
    fn from(v: BigReal) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Section {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in section {}", self.name);
        self.rows.push(row);
    }
}

/// Overall outcome carried in the report and the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some rows could not be computed.
    Partial,
    /// Reference values were not reproduced.
    Mismatch,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Partial => "partial",
            Status::Mismatch => "mismatch",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub sections: Vec<Section>,
    pub notes: Vec<String>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            command: command.into(),
            config: config.clone(),
            sections: Vec::new(),
            notes: Vec::new(),
            status: Status::Ok,
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn to_json(&self) -> Value {
        let config: BTreeMap<String, String> = self
            .config
            .to_kv()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let sections: Vec<Value> = self
            .sections
            .iter()
            .map(|s| {
                let rows: Vec<Value> = s
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = s
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.clone(), v.exact().map_or(Value::Null, Value::String)))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                json!({ "name": s.name, "columns": s.columns, "rows": rows })
            })
            .collect();
        json!({
            "command": self.command,
            "config": config,
            "sections": sections,
            "notes": self.notes,
            "status": self.status.as_str(),
        })
    }

    /// One CSV block per section, separated by a blank line. Full
    /// precision unless `decimals` is given.
    pub fn to_csv(&self, decimals: Option<usize>) -> Result<String, CliError> {
        let mut blocks = Vec::new();
        for s in &self.sections {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Numeric(format!("csv output: {e}"));
            w.write_record(&s.columns).map_err(io)?;
            for row in &s.rows {
                let fields: Vec<String> = row
                    .iter()
                    .map(|c| match decimals {
                        Some(d) => c.fixed(d),
                        None => c.exact().unwrap_or_default(),
                    })
                    .collect();
                w.write_record(&fields).map_err(io)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::Numeric(format!("csv output: {e}")))?;
            blocks.push(String::from_utf8(bytes).expect("csv output is utf-8"));
        }
        Ok(blocks.join("\n"))
    }

    /// Aligned text tables followed by the notes.
    pub fn to_table(&self, decimals: usize) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let cells: Vec<Vec<String>> = s
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.fixed(decimals)).collect())
                .collect();
            let widths: Vec<usize> = s
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    cells
                        .iter()
                        .map(|r| r[i].chars().count())
                        .chain([c.chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |fields: &[String]| {
                fields
                    .iter()
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "[{}]", s.name);
            let _ = writeln!(out, "{}", line(&s.columns));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r));
            }
            out.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let _ = writeln!(out, "# status: {}", self.status.as_str());
        out
    }

    pub fn render(&self, format: Format, decimals: Option<usize>) -> Result<String, CliError> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())
                    .map_err(|e| CliError::Numeric(format!("json output: {e}")))?;
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(decimals)?,
            Format::Table => self.to_table(decimals.unwrap_or(TABLE_DECIMALS)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dkp_aim::Precision;

    fn sample() -> Report {
        let p = Precision::digits(30);
        let mut r = Report::new("spectrum", &RunConfig::default());
        let mut s = Section::new("levels", &["n", "E", "note"]);
        s.push(vec![
            Cell::from(0usize),
            Cell::Real(BigReal::from_ratio(p, 1, 3)),
            Cell::text("a,b"),
        ]);
        s.push(vec![Cell::from(1usize), Cell::Missing, Cell::text("x")]);
        r.sections.push(s);
        r.sections.push(Section::new("empty", &["k"]));
        r.note("hello");
        r
    }

    #[test]
    fn table_uses_six_decimals() {
        let t = sample().to_table(TABLE_DECIMALS);
        assert!(t.contains("0.333333"));
        assert!(!t.contains("0.3333333"));
        assert!(t.contains("# hello"));
    }

    #[test]
    fn csv_quotes_and_separates_sections() {
        let c = sample().to_csv(None).unwrap();
        let blocks: Vec<&str> = c.split("\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert!(blocks[0].starts_with("n,E,note\n0,3.333"));
        assert!(blocks[0].contains("\"a,b\""));
        assert_eq!(blocks[1].trim(), "k");
    }

    #[test]
    fn json_numbers_are_strings() {
        let v = sample().to_json();
        let row = &v["sections"][0]["rows"][0];
        assert!(row["E"].as_str().unwrap().starts_with("3.333333333333"));
        assert_eq!(row["n"], "0");
        assert!(v["sections"][0]["rows"][1]["E"].is_null());
        assert_eq!(v["status"], "ok");
    }
}
