//! Plain-text rendering of a JSON report. Every number is printed with the
//! same formatting as the JSON output.

use serde_json::{Map, Value};

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

fn key_width(map: &Map<String, Value>) -> usize {
    map.iter()
        .filter(|(_, v)| is_scalar(v) || is_inline_array(v))
        .map(|(k, _)| k.len())
        .max()
        .unwrap_or(0)
}

fn is_inline_array(v: &Value) -> bool {
    match v {
        Value::Array(items) => !items.iter().any(|i| i.is_object()),
        _ => false,
    }
}

fn render_rows(rows: &[Value], out: &mut String) {
    let mut columns: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            columns
                .iter()
                .map(|c| r.get(c).map(cell).unwrap_or_else(|| "-".into()))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|row| row[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |items: &[String]| -> String {
        let parts: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        format!("  {}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(&columns));
    for row in &cells {
        out.push_str(&line(row));
    }
}

fn render_object(map: &Map<String, Value>, path: &str, out: &mut String) {
    let w = key_width(map);
    let mut nested = Vec::new();
    for (k, v) in map {
        if is_scalar(v) || is_inline_array(v) {
            out.push_str(&format!("{k:<w$}  {}\n", cell(v)));
        } else {
            nested.push((k, v));
        }
    }
    for (k, v) in nested {
        let sub = if path.is_empty() {
            k.clone()
        } else {
            format!("{path}.{k}")
        };
        out.push_str(&format!("\n[{sub}]\n"));
        match v {
            Value::Object(m) => render_object(m, &sub, out),
            Value::Array(rows) => render_rows(rows, out),
            _ => unreachable!(),
        }
    }
}

pub fn render(report: &Value) -> String {
    let mut out = String::new();
    match report {
        Value::Object(m) => render_object(m, "", &mut out),
        other => out.push_str(&cell(other)),
    }
    out
}
