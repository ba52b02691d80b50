//! Integrating-factor Runge–Kutta time stepping.
//!
//! Writing the system as `∂ₜÛ = −|k|²Û + N(Û)`, the exact diffusion factor
//! `E(τ) = e^{−|k|²τ}` is absorbed and Kutta's third-order scheme is applied
//! to the nonlinear part:
//!
//! ```text
//! N₁ = N(Ûⁿ)
//! N₂ = N(E(h/2)(Ûⁿ + h/2·N₁))
//! N₃ = N(E(h)Ûⁿ − h·E(h)N₁ + 2h·E(h/2)N₂)
//! Ûⁿ⁺¹ = E(h)Ûⁿ + h/6·(E(h)N₁ + 4E(h/2)N₂ + N₃)
//! ```
//!
//! Only nonnegative powers of the factor appear, so stiff modes are damped
//! and never amplified.

use num_complex::Complex;

use super::rhs::{tendencies, tendencies_from, Physical};
use super::state::{DerivedFields, SpectralState, State};
use super::SolverError;
use crate::scalar::Scalar;
use crate::spectral::SpectralField;

/// Time-step controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl<T: Scalar> {
    /// Requested step; the CFL limit may shorten it.
    pub dt: T,
    /// Courant factor in `(0, 1)`.
    pub cfl: T,
    pub t_end: T,
    /// Steps shorter than this abort the run.
    pub dt_min: T,
}

impl<T: Scalar> StepControl<T> {
    pub fn new(dt: T, cfl: T, t_end: T, dt_min: T) -> Result<Self, SolverError> {
        if !(dt_min > T::zero() && dt_min <= dt) {
            return Err(SolverError::InvalidControl(format!(
                "need 0 < dt_min <= dt (dt = {dt}, dt_min = {dt_min})"
            )));
        }
        if !(cfl > T::zero() && cfl < T::one()) {
            return Err(SolverError::InvalidControl(format!("need 0 < cfl < 1 (cfl = {cfl})")));
        }
        if !(t_end >= T::zero()) {
            return Err(SolverError::InvalidControl(format!(
                "need t_end >= 0 (t_end = {t_end})"
            )));
        }
        Ok(Self { dt, cfl, t_end, dt_min })
    }

    /// `cfl · h / (max|u| + max|∇Ψ|)`, or infinity for a motionless state.
    pub fn cfl_limit(&self, state: &State<T>, derived: &DerivedFields<T>) -> T {
        let speed = state.u.magnitude().max_abs() + derived.grad_psi.magnitude().max_abs();
        if speed == T::zero() {
            T::infinity()
        } else {
            self.cfl * state.grid().spacing() / speed
        }
    }

    /// Step length for the next step from `state`: the requested step,
    /// shortened by the CFL limit and clipped so as not to pass `t_end`.
    pub fn next_dt(&self, state: &State<T>, derived: &DerivedFields<T>) -> Result<T, SolverError> {
        let dt = self.dt.min(self.cfl_limit(state, derived));
        if dt < self.dt_min {
            return Err(SolverError::StepCollapse {
                dt: dt.as_f64(),
                dt_min: self.dt_min.as_f64(),
                t: state.t.as_f64(),
            });
        }
        let remaining = self.t_end - state.t;
        Ok(if remaining > T::zero() { dt.min(remaining) } else { dt })
    }
}

fn factors<T: Scalar>(s: &SpectralState<T>, tau: T) -> Vec<T> {
    let grid = s.grid();
    (0..grid.len())
        .map(|idx| (-T::lit(grid.k_squared(idx) as f64) * tau).exp())
        .collect()
}

fn apply<T: Scalar>(f: &SpectralField<T>, e: &[T]) -> SpectralField<T> {
    let coeffs: Vec<Complex<T>> = f.coeffs().iter().zip(e).map(|(&c, &x)| c * x).collect();
    SpectralField::from_raw(f.grid(), coeffs)
}

/// One integrating-factor RK3 step of length `h` in coefficient space.
pub fn advance<T: Scalar>(s: &SpectralState<T>, h: T) -> Result<SpectralState<T>, SolverError> {
    advance_from(s, &Physical::from_spectral(s)?, h)
}

/// [`advance`] with the samples of the starting state supplied.
pub(crate) fn advance_from<T: Scalar>(
    s: &SpectralState<T>,
    start: &Physical<T>,
    h: T,
) -> Result<SpectralState<T>, SolverError> {
    let half = h / T::lit(2.0);
    let e_full = factors(s, h);
    let e_half = factors(s, half);
    let full = |x: &SpectralState<T>| x.map_fields(|f| apply(f, &e_full));
    let halfway = |x: &SpectralState<T>| x.map_fields(|f| apply(f, &e_half));

    let n1 = tendencies_from(start)?;
    let s2 = halfway(&s.add_scaled(&n1, half));
    let n2 = tendencies(&s2)?;

    let e_s = full(s);
    let e_n1 = full(&n1);
    let e_n2 = halfway(&n2);
    let s3 = e_s.add_scaled(&e_n1, -h).add_scaled(&e_n2, T::lit(2.0) * h);
    let n3 = tendencies(&s3)?;

    let sixth = h / T::lit(6.0);
    Ok(e_s
        .add_scaled(&e_n1, sixth)
        .add_scaled(&e_n2, T::lit(4.0) * sixth)
        .add_scaled(&n3, sixth))
}

/// Advances `state` by one step chosen by `control`.
pub fn step<T: Scalar>(state: &State<T>, control: &StepControl<T>) -> Result<State<T>, SolverError> {
    let spectral = state.to_spectral()?;
    let derived = DerivedFields::compute(state, &spectral)?;
    let dt = control.next_dt(state, &derived)?;
    Ok(step_with(state, &spectral, &derived, dt)?.0)
}

/// Advances by `dt` from a state whose spectrum and derived fields are
/// already known, returning the new state in both representations.
pub(crate) fn step_with<T: Scalar>(
    state: &State<T>,
    spectral: &SpectralState<T>,
    derived: &DerivedFields<T>,
    dt: T,
) -> Result<(State<T>, SpectralState<T>), SolverError> {
    let start = Physical {
        u: state.u.clone(),
        v: state.v.clone(),
        w: state.w.clone(),
        grad_psi: derived.grad_psi.clone(),
    };
    let next = advance_from(spectral, &start, dt)?;
    let t = state.t + dt;
    let out = next.to_real(t, state.step_index + 1);
    if !out.is_finite() {
        return Err(SolverError::NonFinite { t: t.as_f64() });
    }
    Ok((out, next))
}
