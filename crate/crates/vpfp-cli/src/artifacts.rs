//! Per-run artifacts: `ledger.csv`, `summary.json`, `checks.toml`,
//! `config.toml` and `final.ckpt`.
//!
//! The CSV has one row per diagnostic time and one column per ledger entry,
//! floats written with 17 significant digits so parsing reproduces them
//! bit for bit.
//!
//! Summary keys, all always present:
//!
//! | key | content |
//! |-----|---------|
//! | `schema_version` | summary format version |
//! | `status` | `"completed"` or `"aborted"` |
//! | `error` | abort message or `null` |
//! | `dt`, `stride`, `steps_taken`, `n_samples`, `t_final` | schedule |
//! | `initial` | amplitude, energies and smallness margin of `h(0)` |
//! | `rates` | per series `{rate, r_squared, n_samples}` or `"undefined"` |
//! | `envelope_margins` | worst normalized margin of every envelope check |
//! | `conservation` | `max_mass_drift`, `max_mean_u`, `max_continuity_relative` |
//! | `checks` | `all_pass` and the failing ids |
//! | `provenance` | `config_hash`, `code_version`, `seed`, `wall_time_s` |

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde_json::{json, Map, Value};
use vpfp_core::checkpoint::write_checkpoint;
use vpfp_core::hypo_diagnostics::EnergyLedger;
use vpfp_core::kinetic_solver::{HermiteCoefField, RunRecord};

use crate::config::RunFile;

pub const SUMMARY_VERSION: u32 = 1;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_ledger_csv(w: impl Write, ledgers: &[EnergyLedger]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = match ledgers.first() {
        Some(l) => l.columns().into_iter().map(|(name, _)| name).collect(),
        None => vec!["time".to_string()],
    };
    out.write_record(&header)?;
    for ledger in ledgers {
        out.write_record(ledger.columns().into_iter().map(|(_, x)| format_float(x)))?;
    }
    out.flush()
}

/// Column names and rows of a ledger CSV.
pub fn read_ledger_csv(r: impl Read) -> io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_reader(r);
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| {
                    io::Error::new(io::ErrorKind::InvalidData, format!("data row {}: '{field}': {e}", line + 1))
                })
            })
            .collect::<io::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

/// The summary document described in the module docs.
pub fn summary(record: &RunRecord, error: Option<&str>) -> Value {
    let rates: Map<String, Value> = record
        .rates
        .iter()
        .map(|(name, fit)| {
            let v = match fit {
                Some(f) => json!({ "rate": f.rate, "r_squared": f.r_squared, "n_samples": f.n_samples }),
                None => Value::String("undefined".into()),
            };
            (name.clone(), v)
        })
        .collect();
    let envelope_margins: Map<String, Value> = record
        .checks
        .entries
        .iter()
        .filter(|(id, _)| id.contains("envelope"))
        .map(|(id, e)| (id.clone(), json!(e.value)))
        .collect();
    let continuity = record
        .conservation
        .iter()
        .filter_map(|c| c.continuity_residual.map(|r| r / c.continuity_scale.max(f64::MIN_POSITIVE)))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let max_mean_u = record.conservation.iter().map(|c| c.mean_u).fold(0.0, f64::max);
    json!({
        "schema_version": SUMMARY_VERSION,
        "status": if error.is_some() { "aborted" } else { "completed" },
        "error": error,
        "dt": record.dt,
        "stride": record.stride,
        "steps_taken": record.steps_taken,
        "n_samples": record.ledgers.len(),
        "t_final": record.ledgers.last().map(|l| l.time),
        "initial": record.initial,
        "rates": rates,
        "envelope_margins": envelope_margins,
        "conservation": {
            "max_mass_drift": record.max_mass_drift(),
            "max_mean_u": max_mean_u,
            "max_continuity_relative": continuity,
        },
        "checks": {
            "all_pass": record.checks.all_pass(),
            "failures": record.checks.failures(),
        },
        "provenance": record.provenance,
    })
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes every artifact of one run into `dir`, creating it.
pub fn write_run(
    dir: &Path,
    file: &RunFile,
    record: &RunRecord,
    state: Option<&HermiteCoefField>,
    error: Option<&str>,
) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut snapshot = file.clone();
    snapshot.solver = record.config.clone();
    snapshot.sweep = None;
    create(dir, "config.toml")?.write_all(snapshot.to_toml().as_bytes())?;
    write_ledger_csv(create(dir, "ledger.csv")?, &record.ledgers)?;
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &summary(record, error))?;
    writeln!(w)?;
    w.flush()?;
    create(dir, "checks.toml")?.write_all(record.checks.to_text().as_bytes())?;
    if let Some(state) = state {
        write_checkpoint(create(dir, "final.ckpt")?, state, &record.provenance.config_hash)?;
    }
    Ok(())
}
