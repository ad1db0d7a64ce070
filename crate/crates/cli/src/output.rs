//! CSV and JSON emission with 17 significant digits.

use std::fmt::Write as _;

use crate::config::Format;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
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

pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A table, or a single record when `record` is set.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub record: bool,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), record: false }
    }

    pub fn record(fields: Vec<(&'static str, Cell)>) -> Self {
        let (columns, row): (Vec<_>, Vec<_>) = fields.into_iter().unzip();
        Self { columns, rows: vec![row], record: true }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => float(*v),
                    Cell::Bool(v) => v.to_string(),
                    Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn object(&self, row: &[Cell]) -> String {
        let mut s = String::from("{");
        for (i, (k, c)) in self.columns.iter().zip(row).enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let v = match c {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) if v.is_finite() => float(*v),
                Cell::Float(_) => "null".into(),
                Cell::Bool(v) => v.to_string(),
                Cell::Text(t) => serde_json::to_string(t).expect("string serialisation"),
            };
            let _ = write!(s, "\"{k}\": {v}");
        }
        s.push('}');
        s
    }

    fn json(&self) -> String {
        if self.record {
            let mut s = self.object(&self.rows[0]);
            s.push('\n');
            return s;
        }
        let body: Vec<String> = self.rows.iter().map(|r| format!("  {}", self.object(r))).collect();
        if body.is_empty() {
            "[]\n".into()
        } else {
            format!("[\n{}\n]\n", body.join(",\n"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(&["n", "p"]);
        t.push(vec![1usize.into(), 0.5.into()]);
        assert_eq!(t.render(Format::Csv), "n,p\n1,5.0000000000000000e-1\n");
        let v: serde_json::Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(v[0]["p"], 0.5);
        let r = Table::record(vec![("ok", true.into()), ("name", "a,b".into())]);
        assert_eq!(r.render(Format::Csv), "ok,name\ntrue,\"a,b\"\n");
        let v: serde_json::Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["name"], "a,b");
    }
}
