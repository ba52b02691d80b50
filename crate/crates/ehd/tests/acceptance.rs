//! Acceptance checks. Prints one PASS or FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use ehd_core::audit::{gn_ratios_of, positivity_term, AuditLedger};
use ehd_core::checkpoint::{self, CheckpointError};
use ehd_core::criteria::{make_accumulator, CriteriaMonitor, CriterionKind, Threshold};
use ehd_core::littlewood_paley::{band_range, bernstein_check, besov_norm_vector, cutoff, decompose, BesovParams};
use ehd_core::presets;
use ehd_core::solver::{run, Observer, ObserverError, RunStatus, Snapshot};
use ehd_core::spectral::random::random_band_limited;
use ehd_core::spectral::{backward_transform, forward_transform, partial};
use ehd_core::{Grid, RealField, RunReport, SpectralField, State, StepControl};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;

const INF: f64 = f64::INFINITY;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// 1. Taylor–Green regression.

struct TaylorGreenProbe {
    checkpoints: Vec<(f64, f64)>,
    max_field_error: f64,
}

impl Observer<f64> for TaylorGreenProbe {
    fn observe(&mut self, snap: &Snapshot<'_, f64>) -> Result<(), ObserverError> {
        let s = snap.state;
        let exact = presets::taylor_green_exact(s.grid(), s.t);
        for (a, b) in s.u.components().into_iter().zip(exact.components()) {
            self.max_field_error = self.max_field_error.max((a - b).max_abs());
        }
        for target in [0.1, 0.25, 0.5] {
            if (s.t - target).abs() < 1e-9 {
                let dv = s.grid().cell_volume();
                let energy: f64 =
                    s.u.components()
                        .iter()
                        .flat_map(|c| c.samples())
                        .map(|x| x * x)
                        .sum::<f64>()
                        * dv;
                self.checkpoints.push((target, energy));
            }
        }
        Ok(())
    }
}

fn taylor_green() -> Outcome {
    let grid = Grid::new(32).map_err(|e| e.to_string())?;
    let control = StepControl::new(1e-3, 0.4, 0.5, 1e-8).map_err(|e| e.to_string())?;
    let mut probe = TaylorGreenProbe {
        checkpoints: Vec::new(),
        max_field_error: 0.0,
    };
    let started = Instant::now();
    let report = run(presets::taylor_green(&grid), &control, &mut [&mut probe]).map_err(|e| e.to_string())?;
    let seconds = started.elapsed().as_secs_f64();
    ensure(report.status == RunStatus::Completed, || {
        format!("status {:?}", report.status)
    })?;
    ensure(probe.checkpoints.len() == 3, || {
        format!("sampled {:?}", probe.checkpoints)
    })?;
    let mut worst = 0.0f64;
    for &(t, e) in &probe.checkpoints {
        worst = worst.max(rel(e, 4.0 * PI.powi(3) * (-4.0 * t).exp()));
    }
    ensure(worst <= 1e-6, || format!("energy error {worst:e}"))?;
    ensure(probe.max_field_error <= 1e-8, || {
        format!("field error {:e}", probe.max_field_error)
    })?;
    ensure(seconds <= 60.0, || format!("took {seconds:.1} s"))?;
    Ok(format!(
        "energy rel. error {worst:.2e}, field error {:.2e}, {seconds:.1} s",
        probe.max_field_error
    ))
}

// 2–4 and 7 share the charged run.

/// The BESOV_ANISO quantity at p = ∞ computed straight from the definition
/// of the Ḃ⁰_{∞,∞} norm, with its own trapezoidal integral.
struct DirectBesov {
    values: Vec<f64>,
    integrals: Vec<f64>,
    last: Option<(f64, f64)>,
    integral: f64,
}

impl Observer<f64> for DirectBesov {
    fn observe(&mut self, snap: &Snapshot<'_, f64>) -> Result<(), ObserverError> {
        let u = &snap.spectral.u;
        let block = [partial(&u.x, 0), partial(&u.x, 1), partial(&u.y, 0), partial(&u.y, 1)];
        let refs: Vec<&SpectralField> = block.iter().collect();
        let params = BesovParams::new(0.0, INF, INF).map_err(|e| ObserverError::Failed(e.to_string()))?;
        let value = besov_norm_vector(&refs, params).map_err(|e| ObserverError::Failed(e.to_string()))?;
        let t = snap.state.t;
        if let Some((t0, v0)) = self.last {
            self.integral += 0.5 * (t - t0) * (v0 + value);
        }
        self.last = Some((t, value));
        self.values.push(value);
        self.integrals.push(self.integral);
        Ok(())
    }
}

struct ChargedRun {
    report: RunReport,
    ledger: AuditLedger,
    monitor: CriteriaMonitor,
    direct: DirectBesov,
}

fn charged_run(dt: f64) -> Result<ChargedRun, String> {
    let grid = Grid::new(32).map_err(|e| e.to_string())?;
    let control = StepControl::new(dt, 0.4, 0.25, 1e-8).map_err(|e| e.to_string())?;
    let accs = [
        (CriterionKind::Bkm, INF),
        (CriterionKind::PsU, INF),
        (CriterionKind::PsGradU, 3.0),
        (CriterionKind::BesovAniso, INF),
    ]
    .into_iter()
    .map(|(k, p)| make_accumulator(k, p, Threshold::Fixed(1.0)))
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    let mut monitor = CriteriaMonitor::new(accs, 0.25, true);
    let mut ledger = AuditLedger::new();
    let mut direct = DirectBesov {
        values: Vec::new(),
        integrals: Vec::new(),
        last: None,
        integral: 0.0,
    };
    let report = run(
        presets::charged_shear(&grid),
        &control,
        &mut [&mut monitor, &mut ledger, &mut direct],
    )
    .map_err(|e| e.to_string())?;
    if report.status != RunStatus::Completed {
        return Err(format!("charged run at dt = {dt} ended with {:?}", report.status));
    }
    Ok(ChargedRun {
        report,
        ledger,
        monitor,
        direct,
    })
}

fn charge_identity(coarse: &ChargedRun, fine: &ChargedRun) -> Outcome {
    let worst = coarse.ledger.summary().max_charge_identity_residual;
    ensure(worst <= 1e-5, || format!("max residual {worst:e}"))?;
    let (a, b) = (
        coarse.ledger.check_charge_identity(),
        fine.ledger.check_charge_identity(),
    );
    let reduction = a / b;
    ensure(reduction >= 3.0, || {
        format!("halving dt reduced the residual only {reduction:.2}x ({a:e} -> {b:e})")
    })?;
    Ok(format!(
        "max residual {worst:.2e}, final {a:.2e} -> {b:.2e} at dt/2 ({reduction:.2}x)"
    ))
}

fn velocity_decay(r: &ChargedRun) -> Outcome {
    let s = r.ledger.summary();
    ensure(s.min_velocity_margin >= -1e-6, || {
        format!("min margin / e0_vel {:e}", s.min_velocity_margin)
    })?;
    ensure(s.max_margin_mismatch <= 1e-5, || {
        format!("margin vs positivity integral {:e}", s.max_margin_mismatch)
    })?;
    Ok(format!(
        "min margin / e0_vel {:.2e}, max mismatch with positivity integral {:.2e}",
        s.min_velocity_margin, s.max_margin_mismatch
    ))
}

fn structural(runs: &[&ChargedRun]) -> Outcome {
    let mut div = 0.0f64;
    let mut drift = 0.0f64;
    let mut min_charge = INF;
    for r in runs {
        div = div.max(r.report.max_divergence);
        drift = drift.max(r.report.max_mean_drift);
        min_charge = min_charge.min(r.ledger.summary().min_charge);
    }
    ensure(div <= 1e-9, || format!("max |div u| {div:e}"))?;
    ensure(drift <= 1e-10, || format!("mean drift {drift:e}"))?;
    ensure(min_charge >= -1e-8, || format!("min charge {min_charge:e}"))?;
    Ok(format!(
        "max |div u| {div:.2e}, mean drift {drift:.2e}, min charge {min_charge:.4}"
    ))
}

fn criteria(r: &ChargedRun) -> Outcome {
    let besov = r
        .monitor
        .accumulators
        .iter()
        .position(|a| a.kind() == CriterionKind::BesovAniso)
        .ok_or("no BESOV_ANISO accumulator")?;
    ensure(r.monitor.series.len() == r.direct.values.len(), || {
        "series lengths differ".into()
    })?;
    let mut worst = 0.0f64;
    for (s, (v, i)) in r
        .monitor
        .series
        .iter()
        .zip(r.direct.values.iter().zip(&r.direct.integrals))
    {
        let scale = |x: f64| x.abs().max(1e-300);
        worst = worst.max((s.values[besov] - v).abs() / scale(*v));
        worst = worst.max((s.integrals[besov] - i).abs() / scale(*i));
    }
    ensure(worst <= 1e-12, || {
        format!("BESOV_ANISO(p = inf) differs from the direct norm by {worst:e}")
    })?;

    for a in &r.monitor.accumulators {
        ensure(a.integral().is_finite(), || format!("{} integral not finite", a.kind()))?;
        ensure(a.crossed_at().is_none(), || {
            format!("{} crossed its threshold at {:?}", a.kind(), a.crossed_at())
        })?;
    }

    let mut closure = 0.0f64;
    let mut built = 0;
    for kind in CriterionKind::ALL {
        for p in [1.6, 2.0, 3.0, 3.5, 4.0, 6.0, 10.0, 100.0, INF] {
            if let Ok(acc) = make_accumulator(kind, p, Threshold::Auto) {
                closure = closure.max(acc.closure_defect());
                built += 1;
            }
        }
    }
    for a in &r.monitor.accumulators {
        closure = closure.max(a.closure_defect());
    }
    ensure(closure <= 1e-12, || format!("closure defect {closure:e}"))?;
    let integrals: Vec<String> = r
        .monitor
        .accumulators
        .iter()
        .map(|a| format!("{}={:.2e}", a.kind(), a.integral()))
        .collect();
    Ok(format!(
        "Besov reduction {worst:.1e}, {}, closure {closure:.1e} over {built} accumulators",
        integrals.join(" ")
    ))
}

// 5. Littlewood–Paley.

fn littlewood_paley() -> Outcome {
    let grid = Grid::new(32).map_err(|e| e.to_string())?;
    let (a, b) = band_range(&grid);
    let mut pou = 0.0f64;
    for idx in 1..grid.len() {
        if grid.is_retained(idx) {
            let r = (grid.k_squared(idx) as f64).sqrt();
            let total: f64 = (a..=b).map(|j| cutoff::band_weight(j, r)).sum();
            pou = pou.max((total - 1.0).abs());
        }
    }
    ensure(pou <= 1e-12, || format!("partition of unity defect {pou:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut recon = 0.0f64;
    for _ in 0..100 {
        let f = forward_transform(&random_band_limited(&grid, &mut rng)).map_err(|e| e.to_string())?;
        let sum = decompose(&f)
            .into_iter()
            .fold(SpectralField::zeros(&grid), |acc, band| &acc + &band.field);
        let x = backward_transform(&sum).map_err(|e| e.to_string())?;
        let y = backward_transform(&f.without_mean()).map_err(|e| e.to_string())?;
        recon = recon.max((&x - &y).max_abs());
    }
    ensure(recon <= 1e-12, || format!("reconstruction error {recon:e}"))?;

    let cos4 = forward_transform(&RealField::from_fn(&grid, |x, _, _| (4.0 * x).cos())).map_err(|e| e.to_string())?;
    // The profile weights at |k| = 4 are exactly 1 for band 2 and 0 elsewhere,
    // so the bands reproduce the mode up to transform round-off.
    for j in a..=b {
        let weight = cutoff::band_weight(j, 4.0);
        let want = if j == 2 { 1.0 } else { 0.0 };
        ensure(weight == want, || format!("band {j} weight at |k| = 4 is {weight}"))?;
    }
    let original = backward_transform(&cos4).map_err(|e| e.to_string())?;
    for band in decompose(&cos4) {
        let x = backward_transform(&band.field).map_err(|e| e.to_string())?;
        let err = if band.j == 2 {
            (&x - &original).max_abs()
        } else {
            x.max_abs()
        };
        ensure(err <= 1e-14, || format!("cos(4x) leaks into band {} ({err:e})", band.j))?;
    }
    Ok(format!(
        "partition defect {pou:.1e}, reconstruction {recon:.1e}, cos(4x) only in band 2"
    ))
}

// 6. Bernstein scaling.

fn bernstein() -> Outcome {
    let grid = Grid::new(32).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lo = bernstein_check(&grid, 2, 1, 2.0, INF, 100, &mut rng).map_err(|e| e.to_string())?;
    let hi = bernstein_check(&grid, 3, 1, 2.0, INF, 100, &mut rng).map_err(|e| e.to_string())?;
    let spread = (lo.upper_max - hi.upper_max).abs() / lo.upper_max.max(hi.upper_max);
    ensure(spread <= 0.15, || {
        format!("bands 2 and 3 differ by {:.1}%", 100.0 * spread)
    })?;
    Ok(format!(
        "max ratios {:.4} (j=2) and {:.4} (j=3), {:.1}% apart",
        lo.upper_max,
        hi.upper_max,
        100.0 * spread
    ))
}

// 8. Oracles.

fn oracles() -> Outcome {
    let grid = Grid::new(8).map_err(|e| e.to_string())?;
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = random_band_limited(&grid, &mut rng).map(f64::abs);
        let w = random_band_limited(&grid, &mut rng).map(|x| x * x);
        let mut total = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let idx = i + n * (j + n * k);
                    let (a, b) = (v.samples()[idx], w.samples()[idx]);
                    total += (a + b) * (a - b) * (a - b);
                }
            }
        }
        let brute = total * (2.0 * PI / n as f64).powi(3);
        let s = State {
            v,
            w,
            ..State::zeros(&grid)
        };
        worst = worst.max((positivity_term(&s) - brute).abs() / brute.max(1.0));
    }
    ensure(worst <= 1e-12, || format!("positivity term off by {worst:e}"))?;

    let grid = Grid::new(16).map_err(|e| e.to_string())?;
    let mut gn = 0.0f64;
    for _ in 0..100 {
        let f = random_band_limited(&grid, &mut rng);
        let g = f.scale(7.3);
        let a = gn_ratios_of(&f, &forward_transform(&f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let b = gn_ratios_of(&g, &forward_transform(&g).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let (a, b) = a.zip(b).ok_or("constant trial field")?;
        gn = gn.max(rel(b.0, a.0)).max(rel(b.1, a.1));
    }
    ensure(gn <= 1e-12, || {
        format!("Gagliardo–Nirenberg ratios change by {gn:e} under scaling")
    })?;
    Ok(format!(
        "positivity vs brute force {worst:.1e}, ratio change under f -> 7.3f {gn:.1e}"
    ))
}

// 9. I/O.

fn ehd(args: &[&str], cwd: &Path) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_ehd"))
        .args(args)
        .current_dir(cwd)
        .env("EHD_THREADS", "1")
        .output()
        .ok()
        .and_then(|o| o.status.code())
}

fn io() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let grid: Arc<Grid> = Grid::new(16).map_err(|e| e.to_string())?;
    let s = presets::random_smooth(&grid, 5, 2.0, 3.0).map_err(|e| e.to_string())?;
    let path = dir.path().join("state.ehds");
    checkpoint::save(&s, &path).map_err(|e| e.to_string())?;
    let back: State = checkpoint::load(&path).map_err(|e| e.to_string())?;
    let same = [
        (&s.u.x, &back.u.x),
        (&s.u.y, &back.u.y),
        (&s.u.z, &back.u.z),
        (&s.v, &back.v),
        (&s.w, &back.w),
    ]
    .iter()
    .all(|(a, b)| {
        a.samples()
            .iter()
            .zip(b.samples())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    });
    ensure(same && back.t == s.t && back.step_index == s.step_index, || {
        "checkpoint round trip is not bit-exact".into()
    })?;
    let mut bytes = checkpoint::encode(&s);
    bytes[100] ^= 1;
    ensure(
        matches!(checkpoint::decode::<f64>(&bytes), Err(CheckpointError::Crc { .. })),
        || "corrupted checkpoint was not rejected by its CRC".into(),
    )?;

    for (name, ic) in [
        ("taylor_green", "taylor_green"),
        ("charged_shear", "charged_shear"),
        ("random_smooth", "random_smooth(42, 1.0, 2.0)"),
    ] {
        common::check_preset(name, ic)?;
    }

    let mut codes = Vec::new();
    let cases = [
        (
            "grid_n = 16\nt_end = 0.01\ndt = 2e-3\ninitial_condition = taylor_green\n",
            0,
        ),
        (
            "grid_n = 16\nt_end = 0.1\ninitial_condition = taylor_green\ncriteria = [(PS_u, 3, auto)]\n",
            1,
        ),
        (
            "grid_n = 16\nt_end = 0.01\ndt_min = 1.04e-6\ninitial_condition = random_smooth(7, 1e12, 2)\n",
            2,
        ),
        ("t_end = 0.1\ninitial_condition = from_checkpoint(divergent.ehds)\n", 3),
    ];
    let mut divergent = State::zeros(&grid);
    divergent.u.x = RealField::from_fn(&grid, |x, _, _| x.sin());
    checkpoint::save(&divergent, &dir.path().join("divergent.ehds")).map_err(|e| e.to_string())?;
    for (i, (body, want)) in cases.iter().enumerate() {
        let sub = dir.path().join(format!("case{i}"));
        std::fs::create_dir(&sub).map_err(|e| e.to_string())?;
        let body = body.replace("divergent.ehds", "../divergent.ehds");
        std::fs::write(sub.join("run.cfg"), body).map_err(|e| e.to_string())?;
        let got = ehd(&["run", "run.cfg"], &sub);
        ensure(got == Some(*want), || format!("expected exit {want}, got {got:?}"))?;
        codes.push(*want);
    }
    Ok(format!(
        "bit-exact round trip, CRC rejects corruption, 3 golden reports stable, exit codes {codes:?}"
    ))
}

fn main() {
    // Single-threaded, as the runtime bound and the golden files assume.
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().ok();

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "Taylor-Green regression", taylor_green()));
    let charged = charged_run(1e-3).and_then(|coarse| charged_run(5e-4).map(|fine| (coarse, fine)));
    match &charged {
        Ok((coarse, fine)) => {
            results.push((2, "charge-energy identity", charge_identity(coarse, fine)));
            results.push((3, "velocity/potential decay", velocity_decay(coarse)));
            results.push((4, "structural invariants", structural(&[coarse, fine])));
        }
        Err(e) => {
            for (n, name) in [
                (2, "charge-energy identity"),
                (3, "velocity/potential decay"),
                (4, "structural invariants"),
            ] {
                results.push((n, name, Err(e.clone())));
            }
        }
    }
    results.push((5, "Littlewood-Paley", littlewood_paley()));
    results.push((6, "Bernstein scaling", bernstein()));
    results.push((
        7,
        "criteria",
        charged
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|(coarse, _)| criteria(coarse)),
    ));
    results.push((8, "oracles", oracles()));
    results.push((9, "I/O", io()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
