use std::cell::OnceCell;
use std::time::Instant;

use serde::Serialize;

use super::state::{DerivedFields, SpectralState, State};
use super::step::{step_with, StepControl};
use super::SolverError;
use crate::checkpoint::state_checksum;
use crate::scalar::Scalar;
use crate::spectral::{backward_unchecked, partial, RealField};

/// Largest accepted `max|∇·u|` for velocities of unit size; the bound
/// scales with `max|u|` above that, since projection round-off does.
pub const DIVERGENCE_TOL: f64 = 1e-9;
/// Largest accepted relative drift of `mean(v)` and `mean(w)`.
pub const MEAN_DRIFT_TOL: f64 = 1e-10;

/// Read-only view of an accepted state handed to observers. `dt` is the
/// length of the step that produced it (zero for the initial state).
pub struct Snapshot<'a, T: Scalar> {
    pub state: &'a State<T>,
    pub spectral: &'a SpectralState<T>,
    pub derived: &'a DerivedFields<T>,
    pub dt: T,
    grad_u: OnceCell<[[RealField<T>; 3]; 3]>,
}

impl<'a, T: Scalar> Snapshot<'a, T> {
    pub fn new(state: &'a State<T>, spectral: &'a SpectralState<T>, derived: &'a DerivedFields<T>, dt: T) -> Self {
        Self {
            state,
            spectral,
            derived,
            dt,
            grad_u: OnceCell::new(),
        }
    }

    /// `∂_j u^i` as `[i][j]`, computed on first use.
    pub fn velocity_gradient(&self) -> &[[RealField<T>; 3]; 3] {
        self.grad_u.get_or_init(|| {
            let comps = self.spectral.u.components();
            comps.map(|c| [0, 1, 2].map(|axis| backward_unchecked(&partial(c, axis))))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObserverError {
    /// A monitored quantity became non-finite.
    BlowUp(String),
    Failed(String),
}

/// Per-step hook invoked after every accepted step and once for the initial
/// state.
pub trait Observer<T: Scalar> {
    fn observe(&mut self, snapshot: &Snapshot<'_, T>) -> Result<(), ObserverError>;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowUpSuspected(String),
    InvariantViolation(String),
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowUpSuspected(_) => "blow_up_suspected",
            RunStatus::InvariantViolation(_) => "invariant_violation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport<T: Scalar> {
    pub status: RunStatus,
    pub steps: u64,
    pub t_final: T,
    pub final_state: State<T>,
    /// CRC-32 of the final state's checkpoint payload.
    pub checksum: u32,
    pub max_divergence: T,
    pub max_mean_drift: T,
    pub min_dt: T,
    pub max_dt: T,
    pub wall_seconds: f64,
}

struct Invariants<T: Scalar> {
    mean_v: T,
    mean_w: T,
    max_divergence: T,
    max_mean_drift: T,
}

impl<T: Scalar> Invariants<T> {
    fn drift(now: T, initial: T) -> T {
        let d = (now - initial).abs();
        if initial.abs() > T::one() {
            d / initial.abs()
        } else {
            d
        }
    }

    fn check(&mut self, state: &State<T>, spectral: &SpectralState<T>) -> Option<String> {
        let div = spectral.divergence_max();
        self.max_divergence = self.max_divergence.max(div);
        let scale = [&state.u.x, &state.u.y, &state.u.z]
            .iter()
            .fold(T::one(), |m, c| m.max(c.max_abs()));
        if !(div.as_f64() <= T::resolvable(DIVERGENCE_TOL) * scale.as_f64()) {
            return Some(format!("max |div u| = {div:e} at t = {}", state.t));
        }
        let drift = Self::drift(state.v.mean(), self.mean_v).max(Self::drift(state.w.mean(), self.mean_w));
        self.max_mean_drift = self.max_mean_drift.max(drift);
        if !(drift.as_f64() <= T::resolvable(MEAN_DRIFT_TOL)) {
            return Some(format!("charge mean drift {drift:e} at t = {}", state.t));
        }
        None
    }
}

fn notify<T: Scalar>(
    observers: &mut [&mut dyn Observer<T>],
    snap: &Snapshot<'_, T>,
) -> Result<Option<String>, SolverError> {
    for obs in observers.iter_mut() {
        match obs.observe(snap) {
            Ok(()) => {}
            Err(ObserverError::BlowUp(msg)) => return Ok(Some(msg)),
            Err(ObserverError::Failed(msg)) => return Err(SolverError::Observer(msg)),
        }
    }
    Ok(None)
}

/// Advances `s0` to `control.t_end`, calling every observer on the initial
/// state and after each accepted step.
///
/// Errors are reserved for unusable input (non-neutral charges, mismatched
/// grids) and observer failures; numerical breakdown and invariant
/// violations end the run with the corresponding status.
pub fn run<T: Scalar>(
    s0: State<T>,
    control: &StepControl<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<RunReport<T>, SolverError> {
    let started = Instant::now();
    let mut state = s0;
    let mut spectral = state.to_spectral()?;
    let mut derived = DerivedFields::compute(&state, &spectral)?;
    let mut inv = Invariants {
        mean_v: state.v.mean(),
        mean_w: state.w.mean(),
        max_divergence: T::zero(),
        max_mean_drift: T::zero(),
    };
    let mut min_dt = T::infinity();
    let mut max_dt = T::zero();
    let finish = |status, state: State<T>, inv: &Invariants<T>, min_dt: T, max_dt: T| RunReport {
        status,
        steps: state.step_index,
        t_final: state.t,
        checksum: state_checksum(&state),
        final_state: state,
        max_divergence: inv.max_divergence,
        max_mean_drift: inv.max_mean_drift,
        min_dt,
        max_dt,
        wall_seconds: started.elapsed().as_secs_f64(),
    };

    if let Some(msg) = inv.check(&state, &spectral) {
        return Ok(finish(RunStatus::InvariantViolation(msg), state, &inv, min_dt, max_dt));
    }
    if let Some(msg) = notify(observers, &Snapshot::new(&state, &spectral, &derived, T::zero()))? {
        return Ok(finish(RunStatus::BlowUpSuspected(msg), state, &inv, min_dt, max_dt));
    }

    let eps = control.t_end.abs().max(T::one()) * T::lit(1e-12);
    while control.t_end - state.t > eps {
        let next = control
            .next_dt(&state, &derived)
            .and_then(|dt| step_with(&state, &spectral, &derived, dt).map(|s| (dt, s)));
        let (dt, (next, next_spectral)) = match next {
            Ok(x) => x,
            Err(e @ (SolverError::StepCollapse { .. } | SolverError::NonFinite { .. })) => {
                return Ok(finish(
                    RunStatus::BlowUpSuspected(e.to_string()),
                    state,
                    &inv,
                    min_dt,
                    max_dt,
                ));
            }
            Err(e) => return Err(e),
        };
        min_dt = min_dt.min(dt);
        max_dt = max_dt.max(dt);
        state = next;
        spectral = next_spectral;
        if let Some(msg) = inv.check(&state, &spectral) {
            return Ok(finish(RunStatus::InvariantViolation(msg), state, &inv, min_dt, max_dt));
        }
        derived = DerivedFields::compute(&state, &spectral)?;
        if let Some(msg) = notify(observers, &Snapshot::new(&state, &spectral, &derived, dt))? {
            return Ok(finish(RunStatus::BlowUpSuspected(msg), state, &inv, min_dt, max_dt));
        }
    }
    Ok(finish(RunStatus::Completed, state, &inv, min_dt, max_dt))
}
