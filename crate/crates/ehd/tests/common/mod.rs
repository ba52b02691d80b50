//! Helpers shared by the integration test targets.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

/// Keys whose values legitimately differ between machines or directories.
pub const VOLATILE: [&str; 3] = ["wall_clock", "checksum", "outputs"];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) + 1e-12
}

pub fn compare(path: &str, got: &Value, want: &Value, diffs: &mut Vec<String>) {
    match (got, want) {
        (Value::Object(g), Value::Object(w)) => {
            let mut keys: Vec<&String> = g.keys().chain(w.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys.into_iter().filter(|k| !VOLATILE.contains(&k.as_str())) {
                match (g.get(k), w.get(k)) {
                    (Some(a), Some(b)) => compare(&format!("{path}.{k}"), a, b, diffs),
                    _ => diffs.push(format!("{path}.{k}: present on one side only")),
                }
            }
        }
        (Value::Array(g), Value::Array(w)) if g.len() == w.len() => {
            for (i, (a, b)) in g.iter().zip(w).enumerate() {
                compare(&format!("{path}[{i}]"), a, b, diffs);
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if !close(a, b) {
                diffs.push(format!("{path}: {a} vs {b}"));
            }
        }
        (a, b) if a == b => {}
        (a, b) => diffs.push(format!("{path}: {a} vs {b}")),
    }
}

/// Runs a preset through the binary and compares its report with the
/// stored copy; `EHD_BLESS` rewrites the copy instead.
pub fn check_preset(name: &str, initial_condition: &str) -> Result<(), String> {
    let dir = TempDir::new().unwrap();
    let config = format!(
        "grid_n = 16\nt_end = 0.02\ndt = 2e-3\ninitial_condition = {initial_condition}\n\
         criteria = [(BKM, inf, auto), (PS_u, 6, 1e3), (PS_grad_u, 3, auto), (BESOV_ANISO, 2, 10)]\n"
    );
    fs::write(dir.path().join("run.cfg"), config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ehd"))
        .args(["run", "run.cfg"])
        .current_dir(dir.path())
        .env("EHD_THREADS", "1")
        .output()
        .unwrap();
    if out.status.code() != Some(0) {
        return Err(format!("{name}: run failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let got: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();

    let stored = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("EHD_BLESS").is_some() {
        let mut clean = got.clone();
        for k in VOLATILE {
            clean.as_object_mut().unwrap().remove(k);
        }
        fs::write(&stored, serde_json::to_string_pretty(&clean).unwrap() + "\n").unwrap();
        return Ok(());
    }
    let want: Value = serde_json::from_str(&fs::read_to_string(&stored).unwrap()).unwrap();
    let mut diffs = Vec::new();
    compare("$", &got, &want, &mut diffs);
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(format!("{name} report drifted:\n{}", diffs.join("\n")))
    }
}
