//! CSV and JSON artifacts. Numbers use 16 significant digits in scientific
//! notation, `.` as decimal separator and LF line endings.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::Resolved;
use crate::error::CliError;
use crate::tasks::Artifacts;

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn hsv_csv(values: &[f64]) -> String {
    let mut s = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, num(*v));
    }
    s
}

pub fn errors_csv(rows: &[(&str, f64, usize)]) -> String {
    let mut s = String::from("metric,value,r\n");
    for (name, v, r) in rows {
        let _ = writeln!(s, "{name},{},{r}", num(*v));
    }
    s
}

/// Rows are padded with empty fields to the longest estimate vector.
pub fn history_csv(art: &Artifacts) -> String {
    let width = art.history.iter().map(|h| h.values.len()).max().unwrap_or(0);
    let mut s = String::from("k,i,r");
    for j in 1..=width {
        let _ = write!(s, ",s{j}");
    }
    s.push('\n');
    for h in &art.history {
        let _ = write!(s, "{},{},{}", h.k, h.i, h.r);
        for j in 0..width {
            s.push(',');
            if let Some(v) = h.values.get(j) {
                s.push_str(&num(*v));
            }
        }
        s.push('\n');
    }
    s
}

pub fn compare_csv(art: &Artifacts) -> String {
    let mut s = String::from("tol,r_selected,atia_hinf_ratio,bt_hinf_ratio,converged\n");
    for row in art.compare.as_deref().unwrap_or_default() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(row.tol),
            row.r_selected,
            num(row.atia_hinf_ratio),
            num(row.bt_hinf_ratio),
            row.converged
        );
    }
    s
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config: &'a Resolved,
    seed: u64,
    converged: bool,
    deterministic: bool,
    threads: usize,
    wall_clock_seconds: f64,
    version: &'static str,
}

pub struct RunInfo {
    pub deterministic: bool,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

/// Writes all artifacts of one experiment into `cfg.output_dir`.
pub fn write_all(cfg: &Resolved, art: &Artifacts, info: &RunInfo) -> Result<(), CliError> {
    let record = RunRecord {
        config: cfg,
        seed: cfg.seed,
        converged: art.converged,
        deterministic: info.deterministic,
        threads: info.threads,
        wall_clock_seconds: info.wall_clock_seconds,
        version: env!("CARGO_PKG_VERSION"),
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Output(e.to_string()))? + "\n";
    let mut files = vec![("run.json", json)];
    if art.compare.is_some() {
        files.push(("compare.csv", compare_csv(art)));
    } else {
        files.push(("hsv.csv", hsv_csv(&art.hsv)));
        files.push(("errors.csv", errors_csv(&art.errors)));
        files.push(("history.csv", history_csv(art)));
    }
    let dir: &Path = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
