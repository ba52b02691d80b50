//! `ehd run`: build the initial state, advance it with every observer
//! attached, and write the series, the report and the checkpoints.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ehd_core::audit::{AuditLedger, AuditSample};
use ehd_core::checkpoint;
use ehd_core::criteria::{make_accumulator, CriteriaMonitor, CriteriaSample, CriterionKind};
use ehd_core::presets;
use ehd_core::solver::{self, Observer, ObserverError, RunStatus, Snapshot};
use ehd_core::spectral::spectral_tail_fraction;
use ehd_core::{DerivedFields, Grid, Scalar, State, StepControl};
use serde_json::{json, Value};

use crate::config::{format_exponent, parse_config, InitialCondition, RunConfig};
use crate::error::{CliError, ErrorCode};

/// Version of the report layout; bumped on any incompatible change.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub report_path: PathBuf,
    pub report: Value,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            RunStatus::Completed => 0,
            RunStatus::BlowUpSuspected(_) => ErrorCode::BlowUp.exit_code(),
            RunStatus::InvariantViolation(_) => ErrorCode::Invariant.exit_code(),
        }
    }
}

/// JSON number, or a string for the values JSON cannot hold.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Reads, validates and runs the configuration at `path`.
pub fn cmd_run(path: &Path) -> Result<RunOutcome, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
    let config = parse_config(&text).map_err(|e| {
        let code = if e.syntax {
            ErrorCode::Parse
        } else {
            ErrorCode::Validation
        };
        CliError::new(
            code,
            format!("{}: {e}", path.display()).replace('\n', &format!("\n{}: ", path.display())),
        )
    })?;
    let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    run_config(&config, &base)
}

fn initial_state(config: &RunConfig) -> Result<State, CliError> {
    let grid = || {
        let n = config.grid_n.expect("validated: presets need grid_n");
        Grid::new(n).map_err(|e| CliError::new(ErrorCode::Validation, e.to_string()))
    };
    let state = match &config.initial_condition {
        InitialCondition::TaylorGreen => presets::taylor_green(&grid()?),
        InitialCondition::ChargedShear => presets::charged_shear(&grid()?),
        InitialCondition::RandomSmooth {
            seed,
            energy,
            peak_wavenumber,
        } => presets::random_smooth(&grid()?, *seed, *energy, *peak_wavenumber)
            .map_err(|e| CliError::new(ErrorCode::Validation, format!("random_smooth: {e}")))?,
        InitialCondition::FromCheckpoint { path } => {
            let s: State = checkpoint::load(path)
                .map_err(|e| CliError::new(ErrorCode::Checkpoint, format!("{}: {e}", path.display())))?;
            if let Some(n) = config.grid_n {
                if n != s.grid().n() {
                    return Err(CliError::new(
                        ErrorCode::Validation,
                        format!(
                            "grid_n = {n} but checkpoint {} holds an n = {} grid",
                            path.display(),
                            s.grid().n()
                        ),
                    ));
                }
            }
            s
        }
    };
    let net = state.net_charge();
    if net.abs() > f64::NEUTRALITY_TOL {
        return Err(CliError::new(
            ErrorCode::Validation,
            format!(
                "initial charges are not neutral: mean(v - w) = {net:e} (tolerance {:e})",
                f64::NEUTRALITY_TOL
            ),
        ));
    }
    Ok(state)
}

/// Writes a checkpoint every `every` accepted steps.
struct CheckpointWriter {
    dir: PathBuf,
    every: u64,
    written: Vec<PathBuf>,
}

impl Observer<f64> for CheckpointWriter {
    fn observe(&mut self, snap: &Snapshot<'_, f64>) -> Result<(), ObserverError> {
        let step = snap.state.step_index;
        if self.every == 0 || step == 0 || !step.is_multiple_of(self.every) {
            return Ok(());
        }
        let path = self.dir.join(format!("step_{step:08}.ehds"));
        checkpoint::save(snap.state, &path).map_err(|e| ObserverError::Failed(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs an already parsed configuration. Relative paths are taken against
/// `base`; the report echoes them as written.
pub fn run_config(config: &RunConfig, base: &Path) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let mut resolved = config.clone();
    resolved.resolve_paths(base);
    let state = initial_state(&resolved)?;
    if state.t >= resolved.t_end {
        return Err(CliError::new(
            ErrorCode::Validation,
            format!("t_end = {} is not after the initial time {}", resolved.t_end, state.t),
        ));
    }
    let control = StepControl::new(resolved.dt, resolved.cfl, resolved.t_end, resolved.dt_min)
        .map_err(|e| CliError::new(ErrorCode::Validation, e.to_string()))?;

    // A step below dt_min at t = 0 is a configuration problem, not a
    // blow-up.
    let spectral = state
        .to_spectral()
        .map_err(|e| CliError::new(ErrorCode::Validation, e.to_string()))?;
    let derived =
        DerivedFields::compute(&state, &spectral).map_err(|e| CliError::new(ErrorCode::Validation, e.to_string()))?;
    let first = resolved.dt.min(control.cfl_limit(&state, &derived));
    if first < resolved.dt_min {
        return Err(CliError::new(
            ErrorCode::Validation,
            format!(
                "dt_min = {:e} exceeds the initial CFL-limited step {first:e}; lower dt_min",
                resolved.dt_min
            ),
        ));
    }

    let accumulators = resolved
        .criteria
        .iter()
        .map(|c| make_accumulator(c.kind, c.p, c.threshold()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::new(ErrorCode::Validation, e.to_string()))?;
    let mut monitor = CriteriaMonitor::new(accumulators, resolved.t_end, true);
    let mut ledger = AuditLedger::new();
    let mut writer = CheckpointWriter {
        dir: resolved.checkpoint_dir.clone().unwrap_or_default(),
        every: resolved.checkpoint_every,
        written: Vec::new(),
    };
    if let Some(dir) = &resolved.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))?;
    }
    for out in [&resolved.series_csv, &resolved.audit_csv, &resolved.report_json] {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(&format!("creating {}", parent.display()), e))?;
        }
    }

    let result = {
        let mut observers: [&mut dyn Observer<f64>; 3] = [&mut monitor, &mut ledger, &mut writer];
        solver::run(state, &control, &mut observers)
    };
    let report = result.map_err(|e| match e {
        solver::SolverError::Observer(msg) => CliError::new(ErrorCode::Io, msg),
        e => CliError::new(ErrorCode::Validation, e.to_string()),
    })?;

    write_series(&resolved.series_csv, &resolved, &monitor.series)?;
    write_audit(&resolved.audit_csv, &ledger.samples)?;
    let final_checkpoint = match &resolved.checkpoint_dir {
        Some(dir) => {
            let path = dir.join("final.ehds");
            checkpoint::save(&report.final_state, &path)
                .map_err(|e| CliError::new(ErrorCode::Checkpoint, format!("{}: {e}", path.display())))?;
            Some(path)
        }
        None => None,
    };

    let crit = monitor.report(&report.status);
    let rows: Vec<Value> = crit
        .rows
        .iter()
        .zip(&monitor.accumulators)
        .zip(&resolved.criteria)
        .map(|((row, acc), spec)| {
            json!({
                "kind": row.kind,
                "p": if row.p.is_infinite() { json!("inf") } else { num(row.p) },
                "q": num(row.q),
                "integral": num(row.integral),
                "peak_integrand": num(row.peak_integrand),
                "threshold": opt(row.threshold),
                "threshold_mode": if spec.threshold.is_none() { "auto" } else { "fixed" },
                "crossed_at": opt(row.crossed_at),
                "closure_defect": num(acc.closure_defect()),
            })
        })
        .collect();
    let sp = report.final_state.to_spectral().ok();
    let tail = |f: fn(&ehd_core::SpectralState) -> Vec<&ehd_core::SpectralField>| {
        sp.as_ref().map_or(Value::Null, |s| {
            num(f(s).into_iter().map(spectral_tail_fraction).fold(0.0, f64::max))
        })
    };
    let (status_label, reason) = match &report.status {
        RunStatus::Completed => ("completed", Value::Null),
        RunStatus::BlowUpSuspected(r) => ("blow_up_suspected", json!(r)),
        RunStatus::InvariantViolation(r) => ("invariant_violation", json!(r)),
    };
    let summary = ledger.summary();
    let value = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "status": status_label,
        "reason": reason,
        "grid_n": report.final_state.grid().n(),
        "steps": report.steps,
        "t_final": num(report.t_final),
        "checksum": format!("{:#010x}", report.checksum),
        "dt": { "min": num(report.min_dt), "max": num(report.max_dt) },
        "invariants": {
            "max_divergence": num(report.max_divergence),
            "max_mean_drift": num(report.max_mean_drift),
            "min_charge": num(summary.min_charge),
        },
        "criteria": rows,
        "ranking": crit.ranking,
        "audit": {
            "e0_charges": num(summary.e0_charges),
            "e0_vel": num(summary.e0_vel),
            "max_charge_identity_residual": num(summary.max_charge_identity_residual),
            "min_velocity_margin": num(summary.min_velocity_margin),
            "max_margin_mismatch": num(summary.max_margin_mismatch),
            "min_positivity_term": num(summary.min_positivity_term),
            "min_charge": num(summary.min_charge),
            "max_ls_ratio": num(summary.max_ls_ratio),
            "ls_ratio_growth_flag": summary.ls_ratio_growth_flag,
            "max_y": num(summary.max_y),
            "charge_identity_ok": summary.charge_identity_ok,
            "velocity_decay_ok": summary.velocity_decay_ok,
        },
        "tail_fraction": {
            "u": tail(|s| s.u.components().to_vec()),
            "charges": tail(|s| vec![&s.v, &s.w]),
        },
        "wall_clock": {
            "solver_seconds": report.wall_seconds,
            "total_seconds": started.elapsed().as_secs_f64(),
        },
        "config": config,
        "outputs": {
            "series_csv": resolved.series_csv,
            "audit_csv": resolved.audit_csv,
            "checkpoints": writer.written,
            "final_checkpoint": final_checkpoint,
        },
    });
    let text = serde_json::to_string_pretty(&value).expect("report serializes");
    fs::write(&resolved.report_json, text + "\n")
        .map_err(|e| CliError::io(&format!("writing {}", resolved.report_json.display()), e))?;
    Ok(RunOutcome {
        status: report.status,
        report_path: resolved.report_json,
        report: value,
    })
}

/// Shortest round-trip text in scientific notation.
fn cell(x: f64) -> String {
    format!("{x:e}")
}

/// Criteria time series: the fixed columns for the first criterion of each
/// kind, then a value and an integral column for every configured
/// criterion.
fn write_series(path: &Path, config: &RunConfig, series: &[CriteriaSample]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(&format!("writing {}", path.display()), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let first = |kind| config.criteria.iter().position(|c| c.kind == kind);
    let fixed = [
        (first(CriterionKind::Bkm), "bkm_integrand", "bkm_integral"),
        (first(CriterionKind::PsU), "ps_u_p", "ps_u_integral"),
        (first(CriterionKind::PsGradU), "", "ps_gradu_integral"),
        (
            first(CriterionKind::BesovAniso),
            "besov_aniso_integrand",
            "besov_aniso_integral",
        ),
    ];
    let mut header: Vec<String> = vec!["t".into(), "dt".into()];
    for (_, value, integral) in fixed {
        if !value.is_empty() {
            header.push(value.into());
        }
        header.push(integral.into());
    }
    for c in &config.criteria {
        let tag = format!("{}_p{}", c.kind, format_exponent(c.p));
        header.push(format!("{tag}_value"));
        header.push(format!("{tag}_integral"));
    }
    w.write_record(&header).map_err(io)?;
    for s in series {
        let mut row = vec![cell(s.t), cell(s.dt)];
        for (idx, value, _) in fixed {
            let pick = |v: &[f64]| idx.map_or(String::new(), |i| cell(v[i]));
            if !value.is_empty() {
                row.push(pick(&s.values));
            }
            row.push(pick(&s.integrals));
        }
        for (v, i) in s.values.iter().zip(&s.integrals) {
            row.push(cell(*v));
            row.push(cell(*i));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

pub const AUDIT_COLUMNS: [&str; 10] = [
    "t",
    "charge_identity_residual",
    "velocity_margin",
    "positivity_term",
    "ls_ratio",
    "Y",
    "gn_ratio_L4",
    "gn_ratio_L3",
    "kinetic_energy",
    "min_charge",
];

fn write_audit(path: &Path, samples: &[AuditSample]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(&format!("writing {}", path.display()), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(AUDIT_COLUMNS).map_err(io)?;
    let o = |x: Option<f64>| x.map_or(String::new(), cell);
    for s in samples {
        w.write_record([
            cell(s.t),
            cell(s.charge_identity_residual),
            cell(s.velocity_margin),
            cell(s.positivity_term),
            cell(s.ls_ratio),
            cell(s.y),
            o(s.gn_ratio_l4),
            o(s.gn_ratio_l3),
            cell(s.kinetic_energy),
            cell(s.min_charge),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}
