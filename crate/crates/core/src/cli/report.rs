use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Number};

use super::{Format, VERSION};

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => (*i).into(),
            Value::Float(x) => {
                Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number)
            }
            Value::Text(s) => s.clone().into(),
            Value::Bool(b) => (*b).into(),
            Value::Missing => serde_json::Value::Null,
        }
    }
}

/// A single table with a config header and trailing notes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// Config echo, in order.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Derived scalars (fits, test statistics) reported after the table.
    pub notes: Vec<(String, Value)>,
    /// Outcome for check-style commands.
    pub check_passed: Option<bool>,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Report {
            columns,
            ..Default::default()
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.push((key.to_string(), value.into()));
    }

    /// Value of a note, for callers inspecting results in-process.
    pub fn note_value(&self, key: &str) -> Option<&Value> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# fpp-lab {VERSION}")?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        for (k, v) in &self.notes {
            writeln!(w, "# {k}={}", v.csv())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut meta = Map::new();
        meta.insert("version".into(), VERSION.into());
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.clone().into());
        }
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                obj.into()
            })
            .collect();
        let notes: Map<String, serde_json::Value> = self
            .notes
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        let mut out = Map::new();
        out.insert("meta".into(), meta.into());
        out.insert("columns".into(), self.columns.clone().into());
        out.insert("rows".into(), rows.into());
        out.insert("notes".into(), notes.into());
        out.into()
    }

    pub fn write_json(&self, w: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
        writeln!(w)
    }

    pub fn render(&self, format: Format) -> String {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf),
            Format::Json => self.write_json(&mut buf),
        }
        .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("output is UTF-8")
    }
}

/// Write `report` to `path`, or stdout when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> io::Result<()> {
    let bytes = report.render(format);
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(bytes.as_bytes())?;
            w.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes.as_bytes())?;
            out.flush()
        }
    }
}
