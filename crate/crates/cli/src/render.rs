use serde_json::Value;

use crate::Format;

/// Command output: the JSON form plus a flat table for CSV and human output.
pub struct Document {
    pub json: Value,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render(doc: &Document, format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&doc.json).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&doc.headers).map_err(|e| e.to_string())?;
            for row in &doc.rows {
                w.write_record(row.iter().map(cell)).map_err(|e| e.to_string())?;
            }
            let bytes = w.into_inner().map_err(|e| e.to_string())?;
            String::from_utf8(bytes).map_err(|e| e.to_string())
        }
        Format::Human => {
            let cells: Vec<Vec<String>> = doc.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            let mut widths: Vec<usize> = doc.headers.iter().map(|h| h.len()).collect();
            for row in &cells {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |items: &mut dyn Iterator<Item = &str>| {
                let parts: Vec<String> = items.zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
                parts.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(&mut doc.headers.iter().copied());
            for row in &cells {
                out += &line(&mut row.iter().map(String::as_str));
            }
            Ok(out)
        }
    }
}
