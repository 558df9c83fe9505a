use std::io::Write;

use serde_json::{json, Value};

use crate::json::to_canonical_string;
use crate::{CliResult, Format, OutputArgs};

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{:.16e}", x)
    }
}

fn write_out(args: &OutputArgs, text: &str) -> CliResult<()> {
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn emit(args: &OutputArgs, default: Format, doc: Value, table: Option<Table>) -> CliResult<()> {
    match (args.format.unwrap_or(default), table) {
        (Format::Csv, Some(t)) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            write_out(args, &String::from_utf8_lossy(&bytes))
        }
        _ => write_out(args, &to_canonical_string(&doc)),
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

pub fn metadata(command: &str, params: Value, tolerances: Value) -> Value {
    json!({
        "command": command,
        "params": params,
        "tolerances": tolerances,
        "version": env!("CARGO_PKG_VERSION"),
    })
}
