//! CSV and JSON emission.
//!
//! Every file starts with `#` comment lines carrying the code version, the
//! config hash and the tolerances, followed by a header row. Floats are
//! written with 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Validated;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, round-trip exact.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Comment lines common to every output of one run.
pub fn preamble(command: &str, run: &Validated) -> Vec<String> {
    let t = &run.config.tolerances;
    vec![
        format!("atomlaser {VERSION}"),
        format!("command: {command}"),
        format!("config_sha256: {}", run.hash),
        format!(
            "tolerances: rel_tol={:e} abs_tol={:e} panel_nodes={} max_panels={} tail_threshold={}",
            t.rel_tol, t.abs_tol, t.panel_nodes, t.max_panels, t.tail_threshold
        ),
        format!("averaging: {}", run.config.averaging.describe()),
        "units: lengths in l0 (r_perp_bar in condensate radii a), frequencies in M g l0 / hbar".into(),
    ]
}

pub fn output_path(run: &Validated, stem: &str, ext: &str) -> PathBuf {
    run.config.output.dir.join(format!("{}_{stem}.{ext}", run.config.output.prefix))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_csv(path: &Path, comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    let map = |e: csv::Error| CliError::io(path, e.into());
    csv.write_record(header).map_err(map)?;
    for r in rows {
        csv.write_record(r).map_err(map)?;
    }
    csv.flush().map_err(io)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}
