use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ExperimentRecord, OutputFormat};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "rule_id,k_rule_bits,seed,sub_len,bias,delta_hat_bits,bound,satisfied,halt_reason";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders records in the given format. Floats use the shortest decimal that
/// round-trips; empty selections leave the bias, bound and satisfied cells
/// empty (CSV) or `null` (JSON).
pub fn render(records: &[ExperimentRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in records {
                let row = [
                    csv_field(&r.rule_id),
                    r.k_rule_bits.to_string(),
                    r.seed.to_string(),
                    r.sub_len.to_string(),
                    opt(r.bias),
                    r.delta_hat_bits.to_string(),
                    opt(r.bound),
                    opt(r.satisfied),
                    r.halt_reason.to_string(),
                ];
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_string_pretty(records).expect("records always serialize");
            out.push('\n');
            out
        }
    }
}

/// Writes records to `path`, or to stdout when `path` is `-`.
pub fn emit(records: &[ExperimentRecord], path: &Path, format: OutputFormat) -> Result<()> {
    let text = render(records, format);
    if path == Path::new("-") {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Error::io("<stdout>", e))
    } else {
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
