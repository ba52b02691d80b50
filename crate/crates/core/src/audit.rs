//! Energy identities and inequality monitors evaluated along a run.
//!
//! With all physical constants equal to one, smooth solutions satisfy
//!
//! ```text
//! ‖v‖² + ‖w‖² + 2∫(‖∇v‖² + ‖∇w‖²) + ∫∫ζη² = ‖v₀‖² + ‖w₀‖²
//! ‖u‖² + ‖∇Ψ‖² + 2∫(‖∇u‖² + ‖ΔΨ‖²) + 2∫∫ζ|∇Ψ|² = ‖u₀‖² + ‖∇Ψ₀‖²
//! ```
//!
//! where `ζ = v + w`, `η = v − w = ΔΨ`. The first is checked as a relative
//! residual. For the second, the velocity margin `e0_vel − (‖u‖² + ‖∇Ψ‖² +
//! d_vel)` must be nonnegative when the charges are, and it is compared
//! against the separately accumulated last term. Time integrals use the
//! trapezoidal rule over accepted steps, so residuals are second order in
//! the step size.
//!
//! Inequalities whose constants are unknown (the logarithmic Sobolev bound
//! for `‖∇u‖_{L∞}`, Gagliardo–Nirenberg) are tracked as ratio series only.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::solver::{DerivedFields, Observer, ObserverError, Snapshot, SpectralState, State};
use crate::spectral::{
    backward_unchecked, gradient_norm_sq, l2_norm_sq, lp_norm, partial, pointwise_magnitude, sobolev_norm, RealField,
    SpectralError, SpectralField,
};

/// Default tolerance of the charge identity residual.
pub const CHARGE_IDENTITY_TOL: f64 = 1e-5;
/// Default tolerance of the velocity margin, relative to `e0_vel`.
pub const VELOCITY_MARGIN_TOL: f64 = 1e-6;

/// `∫(v + w)(v − w)² dx` by uniform quadrature.
pub fn positivity_term<T: Scalar>(s: &State<T>) -> f64 {
    let sum =
        s.v.samples()
            .iter()
            .zip(s.w.samples())
            .fold(T::zero(), |acc, (&v, &w)| acc + (v + w) * (v - w) * (v - w));
    (sum * s.grid().cell_volume()).as_f64()
}

/// `∫(v + w)|∇Ψ|² dx`.
fn migration_term<T: Scalar>(derived: &DerivedFields<T>) -> f64 {
    let g = &derived.grad_psi;
    let sum = (0..derived.zeta.samples().len()).fold(T::zero(), |acc, i| {
        let e2 = g.x.samples()[i].powi(2) + g.y.samples()[i].powi(2) + g.z.samples()[i].powi(2);
        acc + derived.zeta.samples()[i] * e2
    });
    (sum * derived.zeta.grid().cell_volume()).as_f64()
}

fn sum_sq<T: Scalar>(fields: &[&SpectralField<T>], f: impl Fn(&SpectralField<T>) -> T) -> f64 {
    fields.iter().fold(T::zero(), |a, x| a + f(x)).as_f64()
}

fn charge_energy<T: Scalar>(sp: &SpectralState<T>) -> f64 {
    sum_sq(&[&sp.v, &sp.w], l2_norm_sq)
}

/// `‖u‖² + ‖∇Ψ‖²`.
fn velocity_energy<T: Scalar>(sp: &SpectralState<T>, psi_hat: &SpectralField<T>) -> f64 {
    sum_sq(&sp.u.components(), l2_norm_sq) + gradient_norm_sq(psi_hat).as_f64()
}

/// Integrands of the three dissipation integrals and the migration term at
/// one instant: `2(‖∇v‖² + ‖∇w‖²)`, `∫ζη²`, `2(‖∇u‖² + ‖ΔΨ‖²)`,
/// `2∫ζ|∇Ψ|²`.
fn rates<T: Scalar>(s: &State<T>, sp: &SpectralState<T>, derived: &DerivedFields<T>) -> [f64; 4] {
    let eta_sq = l2_norm_sq(&sp.eta().without_mean()).as_f64();
    [
        2.0 * sum_sq(&[&sp.v, &sp.w], gradient_norm_sq),
        positivity_term(s),
        2.0 * (sum_sq(&sp.u.components(), gradient_norm_sq) + eta_sq),
        2.0 * migration_term(derived),
    ]
}

fn ls_ratio_from<T: Scalar>(grad_u: &[[RealField<T>; 3]; 3], sp: &SpectralState<T>, derived: &DerivedFields<T>) -> f64 {
    let entries: Vec<_> = grad_u.iter().flatten().collect();
    let num = pointwise_magnitude(&entries).max_abs().as_f64();
    if num == 0.0 {
        return 0.0;
    }
    let omega_mag = derived.omega.magnitude();
    let omega_l2 = lp_norm(&omega_mag, 2.0).map_or(f64::NAN, |x| x.as_f64());
    let omega_inf = omega_mag.max_abs().as_f64();
    let h3 = sum_sq(&sp.u.components(), |c| sobolev_norm(c, 3.0).map_or(T::nan(), |x| x * x)).sqrt();
    num / (1.0 + omega_l2 + omega_inf * (std::f64::consts::E + h3).ln())
}

fn y_from<T: Scalar>(sp: &SpectralState<T>) -> f64 {
    let sq = |c: &SpectralField<T>, s: f64| sobolev_norm(c, s).map_or(T::nan(), |x| x * x);
    std::f64::consts::E + sum_sq(&sp.u.components(), |c| sq(c, 3.0)) + sum_sq(&[&sp.v, &sp.w], |c| sq(c, 2.0))
}

/// `‖∇u‖_{L∞} / (1 + ‖ω‖_{L²} + ‖ω‖_{L∞} ln(e + ‖u‖_{H³}))`, with `|∇u|`
/// the pointwise Frobenius norm.
pub fn log_sobolev_ratio<T: Scalar>(s: &State<T>) -> Result<f64, SpectralError> {
    let sp = s.to_spectral()?;
    let derived = DerivedFields::compute(s, &sp)?;
    let grad =
        sp.u.components()
            .map(|c| [0, 1, 2].map(|a| backward_unchecked(&partial(c, a))));
    Ok(ls_ratio_from(&grad, &sp, &derived))
}

/// `Y = e + ‖u‖²_{H³} + ‖v‖²_{H²} + ‖w‖²_{H²}`.
pub fn y_growth<T: Scalar>(s: &State<T>) -> Result<f64, SpectralError> {
    Ok(y_from(&s.to_spectral()?))
}

/// Gagliardo–Nirenberg ratios of `f`:
/// `‖f‖₄ / (‖f‖₂^{1/4} ‖∇f‖₂^{3/4})` and `‖f‖₃ / (‖f‖₂^{1/2} ‖∇f‖₂^{1/2})`.
/// `None` for (numerically) constant `f`.
pub fn gn_ratios_of<T: Scalar>(
    f: &RealField<T>,
    f_hat: &SpectralField<T>,
) -> Result<Option<(f64, f64)>, SpectralError> {
    let l2 = l2_norm_sq(f_hat).as_f64().sqrt();
    let grad = gradient_norm_sq(f_hat).as_f64().sqrt();
    if !(grad > 1e-12 * l2) {
        return Ok(None);
    }
    let l4 = lp_norm(f, 4.0)?.as_f64();
    let l3 = lp_norm(f, 3.0)?.as_f64();
    Ok(Some((l4 / (l2.powf(0.25) * grad.powf(0.75)), l3 / (l2 * grad).sqrt())))
}

/// [`gn_ratios_of`] applied to the charge density `v`.
pub fn gn_ratios<T: Scalar>(s: &State<T>) -> Result<Option<(f64, f64)>, SpectralError> {
    gn_ratios_of(&s.v, &crate::spectral::forward_transform(&s.v)?)
}

/// One row of the audit time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSample {
    pub t: f64,
    pub charge_identity_residual: f64,
    pub velocity_margin: f64,
    pub positivity_term: f64,
    pub ls_ratio: f64,
    pub y: f64,
    pub gn_ratio_l4: Option<f64>,
    pub gn_ratio_l3: Option<f64>,
    /// `‖u‖²_{L²}`
    pub kinetic_energy: f64,
    pub min_charge: f64,
}

/// Extremes over a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSummary {
    pub e0_charges: f64,
    pub e0_vel: f64,
    pub max_charge_identity_residual: f64,
    /// Smallest `margin / e0_vel` (absolute margin when `e0_vel = 0`).
    pub min_velocity_margin: f64,
    /// Largest `|margin − 2∫∫ζ|∇Ψ|²| / e0_vel`.
    pub max_margin_mismatch: f64,
    pub min_positivity_term: f64,
    pub min_charge: f64,
    pub max_ls_ratio: f64,
    /// The log-Sobolev ratio never decreased and ended above ten times its
    /// first positive value.
    pub ls_ratio_growth_flag: bool,
    pub max_y: f64,
    pub charge_identity_ok: bool,
    pub velocity_decay_ok: bool,
}

/// Stored initial energies and running dissipation integrals for one run.
#[derive(Clone, Debug, Default)]
pub struct AuditLedger {
    initialized: bool,
    pub e0_charges: f64,
    pub e0_vel: f64,
    /// `2∫(‖∇v‖² + ‖∇w‖²)dτ`
    pub d_charges: f64,
    /// `∫∫(v + w)(v − w)² dx dτ`
    pub d_cross: f64,
    /// `2∫(‖∇u‖² + ‖ΔΨ‖²)dτ`
    pub d_vel: f64,
    /// `2∫∫(v + w)|∇Ψ|² dx dτ`
    pub migration: f64,
    pub y_series: Vec<f64>,
    pub ls_ratio_series: Vec<f64>,
    pub samples: Vec<AuditSample>,
    pub min_charge: f64,
    max_mismatch: f64,
    last: Option<(f64, [f64; 4])>,
    charge_energy: f64,
    velocity_energy: f64,
}

impl AuditLedger {
    pub fn new() -> Self {
        Self {
            min_charge: f64::INFINITY,
            ..Self::default()
        }
    }

    /// Relative residual of the charge identity at the latest observed
    /// state; absolute when the initial charge energy is zero.
    pub fn check_charge_identity(&self) -> f64 {
        let lhs = self.charge_energy + self.d_charges + self.d_cross;
        let diff = (lhs - self.e0_charges).abs();
        if self.e0_charges > 0.0 {
            diff / self.e0_charges
        } else {
            diff
        }
    }

    /// `e0_vel − (‖u‖² + ‖∇Ψ‖² + d_vel)` at the latest observed state.
    pub fn check_velocity_decay(&self) -> f64 {
        self.e0_vel - (self.velocity_energy + self.d_vel)
    }

    fn relative(&self, x: f64) -> f64 {
        if self.e0_vel > 0.0 {
            x / self.e0_vel
        } else {
            x
        }
    }

    /// Records `snap`. The first call fixes the initial energies.
    pub fn record<T: Scalar>(&mut self, snap: &Snapshot<'_, T>) -> AuditSample {
        let (s, sp, derived) = (snap.state, snap.spectral, snap.derived);
        let t = s.t.as_f64();
        let rates = rates(s, sp, derived);
        self.charge_energy = charge_energy(sp);
        self.velocity_energy = velocity_energy(sp, &derived.psi_hat);
        if !self.initialized {
            self.initialized = true;
            self.e0_charges = self.charge_energy;
            self.e0_vel = self.velocity_energy;
        } else if let Some((t0, r0)) = self.last {
            let h = 0.5 * (t - t0);
            self.d_charges += h * (r0[0] + rates[0]);
            self.d_cross += h * (r0[1] + rates[1]);
            self.d_vel += h * (r0[2] + rates[2]);
            self.migration += h * (r0[3] + rates[3]);
        }
        self.last = Some((t, rates));
        let min_charge = s.min_charge().as_f64();
        self.min_charge = self.min_charge.min(min_charge);

        let ls = ls_ratio_from(snap.velocity_gradient(), sp, derived);
        let y = y_from(sp);
        let gn = gn_ratios_of(&s.v, &sp.v).ok().flatten();
        self.ls_ratio_series.push(ls);
        self.y_series.push(y);
        let sample = AuditSample {
            t,
            charge_identity_residual: self.check_charge_identity(),
            velocity_margin: self.check_velocity_decay(),
            positivity_term: rates[1],
            ls_ratio: ls,
            y,
            gn_ratio_l4: gn.map(|g| g.0),
            gn_ratio_l3: gn.map(|g| g.1),
            kinetic_energy: sum_sq(&sp.u.components(), l2_norm_sq),
            min_charge,
        };
        self.max_mismatch = self.max_mismatch.max(self.margin_mismatch());
        self.samples.push(sample.clone());
        sample
    }

    /// `|margin − 2∫∫ζ|∇Ψ|²|` relative to `e0_vel`, at the latest state.
    pub fn margin_mismatch(&self) -> f64 {
        self.relative((self.check_velocity_decay() - self.migration).abs())
    }

    pub fn summary(&self) -> AuditSummary {
        let fold = |f: &dyn Fn(&AuditSample) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
            self.samples.iter().map(f).fold(init, pick)
        };
        let max_residual = fold(&|s| s.charge_identity_residual, 0.0, f64::max);
        let min_margin = self.relative(fold(&|s| s.velocity_margin, f64::INFINITY, f64::min));
        let first_ls = self.ls_ratio_series.iter().copied().find(|&x| x > 0.0);
        let growth = self.ls_ratio_series.len() > 1
            && self.ls_ratio_series.windows(2).all(|w| w[1] >= w[0])
            && first_ls.is_some_and(|f| self.ls_ratio_series.last().is_some_and(|&l| l > 10.0 * f));
        AuditSummary {
            e0_charges: self.e0_charges,
            e0_vel: self.e0_vel,
            max_charge_identity_residual: max_residual,
            min_velocity_margin: min_margin,
            max_margin_mismatch: self.max_mismatch,
            min_positivity_term: fold(&|s| s.positivity_term, f64::INFINITY, f64::min),
            min_charge: self.min_charge,
            max_ls_ratio: self.ls_ratio_series.iter().copied().fold(0.0, f64::max),
            ls_ratio_growth_flag: growth,
            max_y: self.y_series.iter().copied().fold(0.0, f64::max),
            charge_identity_ok: max_residual <= CHARGE_IDENTITY_TOL,
            velocity_decay_ok: min_margin >= -VELOCITY_MARGIN_TOL,
        }
    }
}

impl<T: Scalar> Observer<T> for AuditLedger {
    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<(), ObserverError> {
        let sample = self.record(snap);
        if sample.charge_identity_residual.is_finite() && sample.velocity_margin.is_finite() {
            Ok(())
        } else {
            Err(ObserverError::BlowUp(format!(
                "non-finite energy audit at t = {}",
                sample.t
            )))
        }
    }
}
