//! Run configuration: a flat `key = value` text format.
//!
//! ```text
//! # comments run to the end of the line
//! grid_n = 32
//! t_end = 0.5
//! dt = 1e-3                 # requested step (default 1e-3)
//! cfl = 0.4                 # default 0.4
//! dt_min = 1e-8             # default 1e-8
//! initial_condition = random_smooth(42, 1.0, 2.0)
//! criteria = [(BKM, inf, auto), (PS_u, 6, 1e3), (BESOV_ANISO, 2, auto)]
//! series_csv = criteria_series.csv
//! audit_csv = audit_series.csv
//! report_json = report.json
//! checkpoint_every = 100    # steps; 0 disables periodic checkpoints
//! checkpoint_dir = checkpoints
//! ```
//!
//! Initial conditions: `taylor_green`, `charged_shear`,
//! `random_smooth(seed, energy, peak_wavenumber)`, `from_checkpoint(path)`.
//! Criterion triples are `(kind, p, threshold)` with `p` a number, `inf`
//! or `∞` and the threshold a positive number or `auto`. Relative paths
//! are resolved against the directory holding the configuration file.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ehd_core::criteria::{make_accumulator, CriterionKind, Threshold};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialCondition {
    TaylorGreen,
    ChargedShear,
    RandomSmooth {
        seed: u64,
        energy: f64,
        peak_wavenumber: f64,
    },
    FromCheckpoint {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    #[serde(serialize_with = "serialize_exponent")]
    pub p: f64,
    /// `None` selects the automatic threshold.
    pub threshold: Option<f64>,
}

impl CriterionSpec {
    pub fn threshold(&self) -> Threshold {
        self.threshold.map_or(Threshold::Auto, Threshold::Fixed)
    }

    pub fn label(&self) -> String {
        format!("{}(p={})", self.kind, format_exponent(self.p))
    }
}

pub fn format_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

fn serialize_exponent<S: serde::Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// `None` only when the state comes from a checkpoint.
    pub grid_n: Option<usize>,
    pub t_end: f64,
    pub dt: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub initial_condition: InitialCondition,
    pub criteria: Vec<CriterionSpec>,
    pub series_csv: PathBuf,
    pub audit_csv: PathBuf,
    pub report_json: PathBuf,
    pub checkpoint_every: u64,
    pub checkpoint_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn default_criteria() -> Vec<CriterionSpec> {
        [
            (CriterionKind::Bkm, f64::INFINITY),
            (CriterionKind::PsU, f64::INFINITY),
            (CriterionKind::PsGradU, 3.0),
            (CriterionKind::BesovAniso, f64::INFINITY),
        ]
        .into_iter()
        .map(|(kind, p)| CriterionSpec {
            kind,
            p,
            threshold: None,
        })
        .collect()
    }

    /// Rewrites relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.series_csv);
        fix(&mut self.audit_csv);
        fix(&mut self.report_json);
        if let Some(dir) = &mut self.checkpoint_dir {
            fix(dir);
        }
        if let InitialCondition::FromCheckpoint { path } = &mut self.initial_condition {
            fix(path);
        }
    }
}

/// One problem found in a configuration document.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found, not just the first. `syntax` is set when the
/// document could not be read as key-value lines at all.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors {
    pub syntax: bool,
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

const KEYS: [&str; 12] = [
    "grid_n",
    "t_end",
    "dt",
    "cfl",
    "dt_min",
    "initial_condition",
    "criteria",
    "series_csv",
    "audit_csv",
    "report_json",
    "checkpoint_every",
    "checkpoint_dir",
];

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s)
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim())),
    }
}

fn parse_initial_condition(s: &str) -> Result<InitialCondition, String> {
    let s = s.trim();
    let (name, args) = match s.find('(') {
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("missing `)` in `{s}`"))?;
            (s[..open].trim(), Some(inner))
        }
        None => (s, None),
    };
    match (name, args) {
        ("taylor_green", None) => Ok(InitialCondition::TaylorGreen),
        ("charged_shear", None) => Ok(InitialCondition::ChargedShear),
        ("random_smooth", Some(inner)) => {
            let a: Vec<&str> = inner.split(',').map(str::trim).collect();
            if a.len() != 3 {
                return Err("random_smooth takes (seed, energy, peak_wavenumber)".into());
            }
            let seed = a[0].parse::<u64>().map_err(|_| format!("seed `{}` is not a 64-bit unsigned integer", a[0]))?;
            let energy = parse_number(a[1])?;
            let peak = parse_number(a[2])?;
            if !(energy.is_finite() && energy >= 0.0) {
                return Err(format!("random_smooth energy must be finite and >= 0, got {energy}"));
            }
            if !(peak.is_finite() && peak > 0.0) {
                return Err(format!("random_smooth peak wavenumber must be > 0, got {peak}"));
            }
            Ok(InitialCondition::RandomSmooth { seed, energy, peak_wavenumber: peak })
        }
        ("from_checkpoint", Some(inner)) if !unquote(inner).is_empty() => {
            Ok(InitialCondition::FromCheckpoint { path: PathBuf::from(unquote(inner)) })
        }
        _ => Err(format!(
            "unknown initial condition `{s}` (expected taylor_green, charged_shear, random_smooth(seed, energy, peak_wavenumber) or from_checkpoint(path))"
        )),
    }
}

/// Parses `[(KIND, p, threshold), ...]`, reporting each bad entry.
fn parse_criteria(s: &str) -> Result<Vec<CriterionSpec>, Vec<String>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| vec![format!("criteria must be a bracketed list, got `{}`", s.trim())])?;
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            errors.push(format!("expected `(kind, p, threshold)` at `{rest}`"));
            break;
        };
        let Some(close) = body.find(')') else {
            errors.push(format!("missing `)` in `{rest}`"));
            break;
        };
        let parts: Vec<_> = body[..close].split(',').map(str::trim).collect();
        rest = body[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        if parts.len() != 3 {
            errors.push(format!(
                "criterion `({})` needs exactly three entries",
                body[..close].trim()
            ));
            continue;
        }
        let kind = match parts[0].parse::<CriterionKind>() {
            Ok(k) => k,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let p = match parse_number(parts[1]) {
            Ok(p) => p,
            Err(e) => {
                errors.push(format!("{kind}: {e}"));
                continue;
            }
        };
        let threshold = if parts[2].eq_ignore_ascii_case("auto") {
            None
        } else {
            match parse_number(parts[2]) {
                Ok(t) => Some(t),
                Err(e) => {
                    errors.push(format!("{kind}: threshold {e}"));
                    continue;
                }
            }
        };
        let spec = CriterionSpec { kind, p, threshold };
        match make_accumulator(kind, p, spec.threshold()) {
            Ok(_) => out.push(spec),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let mut syntax = false;
    let mut seen: HashMap<&str, (usize, String)> = HashMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            syntax = true;
            issues.push(ConfigIssue {
                line: Some(line_no),
                message: format!("expected `key = value`, got `{line}`"),
            });
            continue;
        };
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            issues.push(ConfigIssue {
                line: Some(line_no),
                message: format!("unknown key `{key}`"),
            });
            continue;
        };
        if let Some((first, _)) = seen.get(known) {
            issues.push(ConfigIssue {
                line: Some(line_no),
                message: format!("duplicate key `{key}` on lines {first} and {line_no}"),
            });
            continue;
        }
        seen.insert(known, (line_no, value.trim().to_string()));
    }

    let mut err = |line: Option<usize>, message: String| issues.push(ConfigIssue { line, message });
    let get = |key: &str| seen.get(key).map(|(l, v)| (*l, v.as_str()));
    let number = |key: &str, default: Option<f64>, err: &mut dyn FnMut(Option<usize>, String)| match get(key) {
        Some((line, v)) => match parse_number(v) {
            Ok(x) => Some(x),
            Err(e) => {
                err(Some(line), format!("{key}: {e}"));
                None
            }
        },
        None => {
            if default.is_none() {
                err(None, format!("missing required key `{key}`"));
            }
            default
        }
    };

    let initial_condition = match get("initial_condition") {
        Some((line, v)) => parse_initial_condition(v).map_err(|e| err(Some(line), e)).ok(),
        None => {
            err(None, "missing required key `initial_condition`".into());
            None
        }
    };
    let from_checkpoint = matches!(initial_condition, Some(InitialCondition::FromCheckpoint { .. }));

    let grid_n = match get("grid_n") {
        Some((line, v)) => match v.parse::<usize>() {
            Ok(n) if n >= 8 && n.is_power_of_two() => Some(n),
            _ => {
                err(
                    Some(line),
                    format!("grid_n must be a power of two and at least 8, got `{v}`"),
                );
                None
            }
        },
        None => {
            if !from_checkpoint {
                err(None, "missing required key `grid_n`".into());
            }
            None
        }
    };

    let t_end = number("t_end", None, &mut err);
    let dt = number("dt", Some(1e-3), &mut err);
    let cfl = number("cfl", Some(0.4), &mut err);
    let dt_min = number("dt_min", Some(1e-8), &mut err);
    let line_of = |key: &str| get(key).map(|(l, _)| l);
    if let Some(t) = t_end {
        if !(t.is_finite() && t > 0.0) {
            err(line_of("t_end"), format!("t_end must be finite and > 0, got {t}"));
        }
    }
    if let Some(c) = cfl {
        if !(c > 0.0 && c < 1.0) {
            err(line_of("cfl"), format!("cfl must satisfy 0 < cfl < 1, got {c}"));
        }
    }
    if let Some(d) = dt {
        if !(d.is_finite() && d > 0.0) {
            err(line_of("dt"), format!("dt must be finite and > 0, got {d}"));
        }
    }
    if let (Some(d), Some(m)) = (dt, dt_min) {
        if !(m > 0.0 && m <= d) {
            err(
                line_of("dt_min"),
                format!("dt_min must satisfy 0 < dt_min <= dt, got dt_min = {m}, dt = {d}"),
            );
        }
    }

    let criteria = match get("criteria") {
        Some((line, v)) => match parse_criteria(v) {
            Ok(c) => c,
            Err(es) => {
                for e in es {
                    err(Some(line), e);
                }
                Vec::new()
            }
        },
        None => RunConfig::default_criteria(),
    };

    let checkpoint_every = match get("checkpoint_every") {
        Some((line, v)) => v.parse::<u64>().unwrap_or_else(|_| {
            err(
                Some(line),
                format!("checkpoint_every must be a nonnegative integer, got `{v}`"),
            );
            0
        }),
        None => 0,
    };
    let path = |key: &str, default: &str| PathBuf::from(get(key).map_or(default, |(_, v)| unquote(v)));
    let checkpoint_dir = get("checkpoint_dir").map(|(_, v)| PathBuf::from(unquote(v)));
    if checkpoint_every > 0 && checkpoint_dir.is_none() {
        err(
            line_of("checkpoint_every"),
            "checkpoint_every needs checkpoint_dir".into(),
        );
    }

    if !issues.is_empty() {
        return Err(ConfigErrors { syntax, issues });
    }
    Ok(RunConfig {
        grid_n,
        t_end: t_end.expect("validated"),
        dt: dt.expect("validated"),
        cfl: cfl.expect("validated"),
        dt_min: dt_min.expect("validated"),
        initial_condition: initial_condition.expect("validated"),
        criteria,
        series_csv: path("series_csv", "criteria_series.csv"),
        audit_csv: path("audit_csv", "audit_series.csv"),
        report_json: path("report_json", "report.json"),
        checkpoint_every,
        checkpoint_dir,
    })
}
