//! `ehd report`: a readable summary of a run report plus one plot-data
//! CSV per criterion.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::audit::{locate_output, read_report};
use crate::error::{CliError, ErrorCode};

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOutcome {
    pub table: String,
    pub plot_files: Vec<PathBuf>,
}

fn show(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn exponent(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        v => v.as_f64().unwrap_or(f64::NAN),
    }
}

pub fn cmd_report(report_path: &Path) -> Result<ReportOutcome, CliError> {
    let report = read_report(report_path)?;
    let bad = |what: &str| CliError::new(ErrorCode::Parse, format!("{}: {what}", report_path.display()));
    if report["format_version"].as_u64() != Some(crate::run::REPORT_FORMAT_VERSION as u64) {
        return Err(bad("unsupported or missing format_version"));
    }
    let criteria = report["criteria"]
        .as_array()
        .ok_or_else(|| bad("missing criteria table"))?;

    let mut t = String::new();
    let _ = writeln!(t, "status: {}", show(&report["status"]));
    if let Some(reason) = report["reason"].as_str() {
        let _ = writeln!(t, "reason: {reason}");
    }
    let _ = writeln!(
        t,
        "grid: {}^3, steps: {}, t_final: {}",
        show(&report["grid_n"]),
        show(&report["steps"]),
        show(&report["t_final"])
    );
    let _ = writeln!(t);
    let _ = writeln!(
        t,
        "{:<12} {:>6} {:>10} {:>14} {:>14} {:>14} {:>12}",
        "criterion", "p", "q", "integral", "peak", "threshold", "crossed_at"
    );
    for row in criteria {
        let _ = writeln!(
            t,
            "{:<12} {:>6} {:>10} {:>14} {:>14} {:>14} {:>12}",
            show(&row["kind"]),
            row["p"].as_str().map_or_else(|| row["p"].to_string(), str::to_string),
            row["q"].as_f64().map_or("-".into(), |q| format!("{q:.4}")),
            show(&row["integral"]),
            show(&row["peak_integrand"]),
            show(&row["threshold"]),
            row["crossed_at"].as_f64().map_or("-".into(), |x| format!("{x:.6}")),
        );
    }
    if let Some(ranking) = report["ranking"].as_array() {
        let order: Vec<String> = ranking
            .iter()
            .filter_map(|i| i.as_u64().and_then(|i| criteria.get(i as usize)))
            .map(|r| show(&r["kind"]))
            .collect();
        let _ = writeln!(t, "crossing order: {}", order.join(", "));
    }
    let audit = &report["audit"];
    let _ = writeln!(t);
    for key in [
        "max_charge_identity_residual",
        "min_velocity_margin",
        "max_margin_mismatch",
        "min_charge",
        "max_ls_ratio",
        "max_y",
    ] {
        let _ = writeln!(t, "{key}: {}", show(&audit[key]));
    }

    // Plot data: integrand value^q next to its running integral.
    let series_path = locate_output(&report, report_path, "series_csv", "criteria_series.csv");
    let io = |e: csv::Error| CliError::io(&format!("reading {}", series_path.display()), e);
    let mut reader = csv::Reader::from_path(&series_path).map_err(io)?;
    let header = reader.headers().map_err(io)?.clone();
    let records: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(io)?;
    let extra = header
        .len()
        .checked_sub(2 * criteria.len())
        .ok_or_else(|| bad("series has too few columns"))?;
    let dir = report_path.parent().unwrap_or(Path::new("."));
    let stem = report_path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let mut plot_files = Vec::new();
    for (i, row) in criteria.iter().enumerate() {
        let q = row["q"].as_f64().ok_or_else(|| bad("criterion without q"))?;
        let p = exponent(&row["p"]);
        let name = format!(
            "{stem}_plot_{i}_{}_p{}.csv",
            show(&row["kind"]),
            if p.is_infinite() { "inf".into() } else { p.to_string() }
        );
        let path = dir.join(name);
        let wio = |e: csv::Error| CliError::io(&format!("writing {}", path.display()), e);
        let mut w = csv::Writer::from_path(&path).map_err(wio)?;
        w.write_record(["t", "integrand", "integral"]).map_err(wio)?;
        for rec in &records {
            let value: f64 = rec.get(extra + 2 * i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            w.write_record([
                rec.get(0).unwrap_or(""),
                &format!("{:e}", value.powf(q)),
                rec.get(extra + 2 * i + 1).unwrap_or(""),
            ])
            .map_err(wio)?;
        }
        w.flush()
            .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
        plot_files.push(path);
    }
    Ok(ReportOutcome { table: t, plot_files })
}
