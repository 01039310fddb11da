use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const TOOL: &str = "khintype";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of every output file.
pub struct Stamp {
    pub command: &'static str,
    pub config_hash: String,
    pub config_json: String,
}

impl Stamp {
    pub fn new<T: Serialize>(command: &'static str, resolved: &T) -> Self {
        Self {
            command,
            config_hash: crate::config::config_hash(resolved),
            config_json: serde_json::to_string(resolved).expect("configs serialize"),
        }
    }
}

/// `#` comment lines (stamp, then `notes`) followed by a CSV table.
pub fn csv_bytes(stamp: &Stamp, notes: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# {TOOL} {VERSION} {}", stamp.command)?;
    writeln!(buf, "# config_hash: {}", stamp.config_hash)?;
    writeln!(buf, "# config: {}", stamp.config_json)?;
    for n in notes {
        writeln!(buf, "# {n}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().context("flushing csv")
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config_hash: &'a str,
    config: serde_json::Value,
    result: &'a R,
}

pub fn json_bytes<R: Serialize>(stamp: &Stamp, result: &R) -> Result<Vec<u8>> {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command: stamp.command,
        config_hash: &stamp.config_hash,
        config: serde_json::from_str(&stamp.config_json)?,
        result,
    };
    let mut out = serde_json::to_vec_pretty(&env)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path`, or to stdout without one.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
