//! Machine-readable run reports: one flat record per check, serialized as
//! a JSON array or CSV with a header row. Floating-point values are written
//! with 17 significant digits so equal runs produce byte-identical output.

use std::io::Write;

#[derive(Debug, Clone)]
pub struct Record {
    pub check: String,
    pub params: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown output format {other:?} (json|csv)")),
        }
    }
}

/// 17 significant digits; non-finite values become `null` in JSON.
fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn render(records: &[Record], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut out = String::from("[\n");
            for (k, r) in records.iter().enumerate() {
                out.push_str(&format!(
                    "  {{\"check\":\"{}\",\"params\":\"{}\",\"max_deviation\":{},\"tolerance\":{},\"pass\":{},\"notes\":\"{}\"}}{}\n",
                    json_escape(&r.check),
                    json_escape(&r.params),
                    json_num(r.max_deviation),
                    json_num(r.tolerance),
                    r.pass,
                    json_escape(&r.notes),
                    if k + 1 < records.len() { "," } else { "" },
                ));
            }
            out.push_str("]\n");
            out
        }
        OutputFormat::Csv => {
            let mut out = String::from("check,params,max_deviation,tolerance,pass,notes\n");
            for r in records {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    csv_quote(&r.check),
                    csv_quote(&r.params),
                    csv_num(r.max_deviation),
                    csv_num(r.tolerance),
                    r.pass,
                    csv_quote(&r.notes),
                ));
            }
            out
        }
    }
}

pub fn emit(records: &[Record], format: OutputFormat, out: Option<&std::path::Path>) -> std::io::Result<()> {
    let text = render(records, format);
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
