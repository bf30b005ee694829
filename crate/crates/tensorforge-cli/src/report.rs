// SPDX-License-Identifier: Apache-2.0

//! Deterministic JSON and CSV serialization of reports.

use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A report with an optional explicit table; without one, CSV output flattens top-level scalars.
pub struct Report {
    pub json: Value,
    pub table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    /// Tensor documents are written compactly so they match the canonical file form.
    pub compact: bool,
}

impl Report {
    pub fn new(json: Value) -> Self {
        Self { json, table: None, compact: false }
    }

    pub fn tensor(json: Value) -> Self {
        Self { json, table: None, compact: true }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json if self.compact => format!("{}\n", self.json),
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.json).expect("serializable")),
            Format::Csv => match &self.table {
                Some((header, rows)) => write_csv(header, rows),
                None => flat_csv(&self.json),
            },
        }
    }
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| escape(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|x| if x.is_array() || x.is_object() { None } else { scalar(x) })
                .collect();
            parts.map(|p| p.join(" "))
        }
        Value::Object(_) => None,
    }
}

/// One header line and one row from the scalar fields of an object, in key order.
fn flat_csv(v: &Value) -> String {
    let Some(obj) = v.as_object() else {
        return String::new();
    };
    let mut header = Vec::new();
    let mut row = Vec::new();
    for (k, x) in obj {
        if let Some(s) = scalar(x) {
            header.push(k.as_str());
            row.push(s);
        }
    }
    if header.is_empty() {
        return "\n".into();
    }
    write_csv(&header, &[row])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_reports() {
        assert_eq!(Report::new(json!({})).render(Format::Json), "{}\n");
        assert_eq!(Report::new(json!({})).render(Format::Csv), "\n");
        assert_eq!(write_csv(&["m", "r"], &[]), "m,r\n");
    }

    #[test]
    fn flat_rows_follow_key_order() {
        let r = Report::new(json!({"b": 2, "a": "x,y", "nested": {"z": 1}, "v": [1, 2]}));
        assert_eq!(r.render(Format::Csv), "a,b,v\n\"x,y\",2,1 2\n");
    }
}
