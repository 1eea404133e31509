//! Serialization helpers for report values that may be infinite.
//!
//! JSON has no infinities, so `±∞` and NaN are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use serde::Serializer;

pub fn ext_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_ext(*x))
    }
}

pub fn ext_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ext_f64(v, s),
        None => s.serialize_none(),
    }
}

/// Text form used in CSV and JSON: shortest round-trip decimal, or
/// `inf`/`-inf`/`nan`.
pub fn fmt_ext(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

/// A plot-ready table: named columns, rows already formatted as text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text, each line of `header` prefixed by `# ` above the column row.
    pub fn to_csv(&self, header: &[String]) -> std::io::Result<String> {
        let mut out = String::new();
        for line in header {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Shorthand for a numeric cell.
pub fn cell(x: f64) -> String {
    fmt_ext(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize)]
    struct W {
        #[serde(serialize_with = "ext_f64")]
        x: f64,
    }

    #[test]
    fn infinities_are_strings() {
        assert_eq!(serde_json::to_string(&W { x: f64::NEG_INFINITY }).unwrap(), r#"{"x":"-inf"}"#);
        assert_eq!(serde_json::to_string(&W { x: 0.5 }).unwrap(), r#"{"x":0.5}"#);
        assert_eq!(fmt_ext(1.0), "1.0");
    }

    #[test]
    fn csv_with_header_comment() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec!["1".into(), cell(f64::NEG_INFINITY)]);
        let text = t.to_csv(&["mode=double".into()]).unwrap();
        assert_eq!(text, "# mode=double\nn,value\n1,-inf\n");
    }
}
