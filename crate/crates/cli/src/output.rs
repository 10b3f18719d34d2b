use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// CSV body produced by a command plus `# key=value` footer lines.
#[derive(Debug, Default)]
pub struct Report {
    pub csv: String,
    pub footer: Vec<(String, String)>,
}

impl Report {
    pub fn push_footer(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.to_string(), value.into()));
    }
}

fn cell(text: &str) -> Value {
    match text {
        "" => Value::Null,
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        // JSON has no inf/nan
        "inf" | "-inf" | "nan" => Value::String(text.into()),
        _ => text
            .parse::<f64>()
            .ok()
            .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
            .unwrap_or_else(|| Value::String(text.into())),
    }
}

fn to_json(report: &Report, meta: Value) -> Value {
    let mut lines = report.csv.lines();
    let columns: Vec<&str> = lines.next().map(|h| h.split(',').collect()).unwrap_or_default();
    let rows: Vec<Value> = lines
        .map(|l| Value::Array(l.split(',').map(cell).collect()))
        .collect();
    let footer: Map<String, Value> = report.footer.iter().map(|(k, v)| (k.clone(), cell(v))).collect();
    json!({ "meta": meta, "columns": columns, "rows": rows, "footer": footer })
}

pub fn emit(report: &Report, format: Format, meta: Value, out: Option<&Path>) -> io::Result<()> {
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => {
            w.write_all(report.csv.as_bytes())?;
            for (k, v) in &report.footer {
                writeln!(w, "# {k}={v}")?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &to_json(report, meta))?;
            writeln!(w)?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_to_json_cells() {
        let report = Report {
            csv: "a,b,c,d\n1.5,inf,true,\n".into(),
            footer: vec![("dist".into(), "1e-12".into())],
        };
        let v = to_json(&report, json!({"units": "hbar = k_B = 1"}));
        assert_eq!(v["columns"], json!(["a", "b", "c", "d"]));
        assert_eq!(v["rows"][0], json!([1.5, "inf", true, null]));
        assert_eq!(v["footer"]["dist"], json!(1e-12));
        assert_eq!(v["meta"]["units"], "hbar = k_B = 1");
    }
}
