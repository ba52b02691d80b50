//! `ehd audit`: re-check a finished run's audit series against the
//! energy contracts.

use std::fs;
use std::path::{Path, PathBuf};

use ehd_core::audit::{CHARGE_IDENTITY_TOL, VELOCITY_MARGIN_TOL};
use serde_json::Value;

use crate::error::{CliError, ErrorCode};

/// Charges may dip below zero by this much before the audit complains.
pub const MIN_CHARGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct AuditOutcome {
    pub lines: Vec<String>,
    pub violations: Vec<String>,
}

impl AuditOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.violations.is_empty() {
            0
        } else {
            ErrorCode::Invariant.exit_code()
        }
    }
}

pub(crate) fn read_report(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::new(ErrorCode::Parse, format!("{}: {e}", path.display())))
}

/// Finds an output named in the report, falling back to `default` next to
/// the report when the recorded path no longer exists.
pub(crate) fn locate_output(report: &Value, report_path: &Path, key: &str, default: &str) -> PathBuf {
    let dir = report_path.parent().unwrap_or(Path::new("."));
    let recorded = report["outputs"][key].as_str().map(PathBuf::from);
    match recorded {
        Some(p) if p.exists() => p,
        Some(p) => dir.join(p.file_name().map_or_else(|| default.into(), |f| f.to_owned())),
        None => dir.join(default),
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

/// `target` is a run directory holding `report.json`, or the report itself.
pub fn cmd_audit(target: &Path) -> Result<AuditOutcome, CliError> {
    let report_path = if target.is_dir() {
        target.join("report.json")
    } else {
        target.to_path_buf()
    };
    let report = read_report(&report_path)?;
    let csv_path = locate_output(&report, &report_path, "audit_csv", "audit_series.csv");
    let io = |e: csv::Error| CliError::io(&format!("reading {}", csv_path.display()), e);
    let mut reader = csv::Reader::from_path(&csv_path).map_err(io)?;
    let header = reader.headers().map_err(io)?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::new(
                ErrorCode::Parse,
                format!("{}: missing column `{name}`", csv_path.display()),
            )
        })
    };
    let (c_t, c_res, c_margin, c_pos, c_min) = (
        col("t")?,
        col("charge_identity_residual")?,
        col("velocity_margin")?,
        col("positivity_term")?,
        col("min_charge")?,
    );

    let e0_vel = report["audit"]["e0_vel"].as_f64().unwrap_or(0.0);
    let mut rows = 0usize;
    let mut t_last = f64::NAN;
    let (mut max_res, mut min_margin, mut min_pos, mut min_charge) =
        (0.0f64, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for rec in reader.records() {
        let rec = rec.map_err(io)?;
        let get = |c: usize| parse_cell(rec.get(c).unwrap_or("")).unwrap_or(f64::NAN);
        rows += 1;
        t_last = get(c_t);
        // NaN never wins a comparison, so fold it in explicitly.
        let nan_max = |a: f64, b: f64| if b.is_nan() { f64::INFINITY } else { a.max(b) };
        let nan_min = |a: f64, b: f64| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) };
        max_res = nan_max(max_res, get(c_res));
        let margin = get(c_margin);
        min_margin = nan_min(min_margin, if e0_vel > 0.0 { margin / e0_vel } else { margin });
        min_pos = nan_min(min_pos, get(c_pos));
        min_charge = nan_min(min_charge, get(c_min));
    }
    let status = report["status"].as_str().unwrap_or("unknown").to_string();
    let lines = vec![
        format!("report: {}", report_path.display()),
        format!("status: {status}"),
        format!("samples: {rows} (last t = {t_last})"),
        format!("max charge identity residual: {max_res:e} (tolerance {CHARGE_IDENTITY_TOL:e})"),
        format!("min velocity margin / e0_vel: {min_margin:e} (tolerance -{VELOCITY_MARGIN_TOL:e})"),
        format!("min positivity term: {min_pos:e}"),
        format!("min charge: {min_charge:e} (tolerance -{MIN_CHARGE_TOL:e})"),
    ];
    let mut violations = Vec::new();
    // A run stopped on its initial state leaves an empty series; only the
    // status can be judged then.
    if rows > 0 {
        if !(max_res <= CHARGE_IDENTITY_TOL) {
            violations.push(format!(
                "charge identity residual {max_res:e} exceeds {CHARGE_IDENTITY_TOL:e}"
            ));
        }
        if !(min_margin >= -VELOCITY_MARGIN_TOL) {
            violations.push(format!("velocity margin {min_margin:e} below -{VELOCITY_MARGIN_TOL:e}"));
        }
        if !(min_charge >= -MIN_CHARGE_TOL) {
            violations.push(format!("charge density reached {min_charge:e}"));
        }
    }
    if status == "invariant_violation" {
        let reason = report["reason"].as_str().unwrap_or("");
        violations.push(format!("run ended with an invariant violation: {reason}"));
    }
    Ok(AuditOutcome { lines, violations })
}
