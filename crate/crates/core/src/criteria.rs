//! Running blow-up criterion functionals `∫₀ᵗ Q(τ)^q dτ`.
//!
//! | kind          | Q                                   | scaling          | admissible p |
//! |---------------|-------------------------------------|------------------|--------------|
//! | `BKM`         | `‖ω‖_{L∞}`                          | q = 1            | p = ∞        |
//! | `PS_u`        | `‖u‖_{Lᵖ}`                          | 2/q + 3/p = 1    | 3 < p ≤ ∞    |
//! | `PS_grad_u`   | `‖∇u‖_{Lᵖ}`                         | 2/q + 3/p = 2    | 3/2 < p ≤ ∞  |
//! | `BESOV_ANISO` | `‖∇_h u^h‖_{Ḃ⁰_{p,2p/3}}`           | 2/q + 3/p = 2    | 3/2 < p ≤ ∞  |
//!
//! Matrix-valued quantities (`∇u` and the horizontal block
//! `(∂₁u¹, ∂₂u¹, ∂₁u², ∂₂u²)`) are measured through their pointwise
//! Euclidean (Frobenius) magnitude. Time integrals use the trapezoidal rule
//! over accepted steps.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::littlewood_paley::{besov_norm_vector, BesovError, BesovParams};
use crate::scalar::Scalar;
use crate::solver::{Observer, ObserverError, RunStatus, Snapshot};
use crate::spectral::{lp_norm, partial, pointwise_magnitude, SpectralError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CriterionKind {
    #[serde(rename = "BKM")]
    Bkm,
    #[serde(rename = "PS_u")]
    PsU,
    #[serde(rename = "PS_grad_u")]
    PsGradU,
    #[serde(rename = "BESOV_ANISO")]
    BesovAniso,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] = [Self::Bkm, Self::PsU, Self::PsGradU, Self::BesovAniso];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bkm => "BKM",
            Self::PsU => "PS_u",
            Self::PsGradU => "PS_grad_u",
            Self::BesovAniso => "BESOV_ANISO",
        }
    }

    /// Right-hand side of the scaling relation `2/q + 3/p = target`.
    pub fn target(self) -> f64 {
        match self {
            Self::PsU => 1.0,
            _ => 2.0,
        }
    }

    /// Admissible range of `p`, as text.
    pub fn range(self) -> &'static str {
        match self {
            Self::Bkm => "p = ∞",
            Self::PsU => "3 < p ≤ ∞",
            Self::PsGradU | Self::BesovAniso => "3/2 < p ≤ ∞",
        }
    }

    fn admits(self, p: f64) -> bool {
        match self {
            Self::Bkm => p == f64::INFINITY,
            Self::PsU => p > 3.0,
            Self::PsGradU | Self::BesovAniso => p > 1.5,
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = CriteriaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CriteriaError::UnknownKind(s.trim().to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    /// Ten times the integral's value at 10% of the horizon.
    Auto,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("unknown criterion kind {0:?} (expected BKM, PS_u, PS_grad_u or BESOV_ANISO)")]
    UnknownKind(String),
    #[error("{kind}: p = {p} violates {range}")]
    OutOfRange {
        kind: CriterionKind,
        p: f64,
        range: &'static str,
    },
    #[error("{kind}: threshold must be positive and finite, got {value}")]
    Threshold { kind: CriterionKind, value: f64 },
    #[error("{kind}: non-finite integrand at t = {t}")]
    NonFinite { kind: CriterionKind, t: f64 },
    #[error(transparent)]
    Besov(#[from] BesovError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Debug)]
pub struct CriterionAccumulator {
    kind: CriterionKind,
    p: f64,
    q: f64,
    threshold: Threshold,
    horizon: f64,
    integral: f64,
    last: Option<(f64, f64)>,
    peak: f64,
    resolved: Option<f64>,
    crossed_at: Option<f64>,
}

/// Builds an accumulator, deriving `q` from the kind's scaling relation.
pub fn make_accumulator(
    kind: CriterionKind,
    p: f64,
    threshold: Threshold,
) -> Result<CriterionAccumulator, CriteriaError> {
    if p.is_nan() || !kind.admits(p) {
        return Err(CriteriaError::OutOfRange {
            kind,
            p,
            range: kind.range(),
        });
    }
    let resolved = match threshold {
        Threshold::Fixed(value) if !(value.is_finite() && value > 0.0) => {
            return Err(CriteriaError::Threshold { kind, value });
        }
        Threshold::Fixed(value) => Some(value),
        Threshold::Auto => None,
    };
    let q = match kind {
        CriterionKind::Bkm => 1.0,
        _ => 2.0 / (kind.target() - 3.0 / p),
    };
    Ok(CriterionAccumulator {
        kind,
        p,
        q,
        threshold,
        horizon: f64::INFINITY,
        integral: 0.0,
        last: None,
        peak: 0.0,
        resolved,
        crossed_at: None,
    })
}

impl CriterionAccumulator {
    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Besov summation exponent `2p/3`; only meaningful for `BESOV_ANISO`.
    pub fn r(&self) -> f64 {
        2.0 * self.p / 3.0
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn last_value(&self) -> Option<f64> {
        self.last.map(|(_, v)| v)
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Alarm level in force, once known.
    pub fn resolved_threshold(&self) -> Option<f64> {
        self.resolved
    }

    pub fn crossed_at(&self) -> Option<f64> {
        self.crossed_at
    }

    /// Sets the run horizon used to resolve an automatic threshold.
    pub fn set_horizon(&mut self, t_end: f64) {
        self.horizon = t_end;
    }

    /// `|2/q + 3/p − target|`.
    pub fn closure_defect(&self) -> f64 {
        match self.kind {
            CriterionKind::Bkm => (self.q - 1.0).abs(),
            _ => (2.0 / self.q + 3.0 / self.p - self.kind.target()).abs(),
        }
    }

    /// Instantaneous quantity `Q` for the state in `snap`.
    pub fn quantity<T: Scalar>(&self, snap: &Snapshot<'_, T>) -> Result<f64, CriteriaError> {
        quantity(self.kind, self.p, snap)
    }

    /// Adds the trapezoidal increment for integrand `value` at time `t`.
    pub fn accumulate(&mut self, t: f64, value: f64) -> Result<(), CriteriaError> {
        if !value.is_finite() {
            return Err(CriteriaError::NonFinite { kind: self.kind, t });
        }
        let g = value.powf(self.q);
        if let Some((t0, v0)) = self.last {
            self.integral += 0.5 * (t - t0) * (v0.powf(self.q) + g);
        }
        if !self.integral.is_finite() {
            return Err(CriteriaError::NonFinite { kind: self.kind, t });
        }
        self.last = Some((t, value));
        self.peak = self.peak.max(value);
        if self.resolved.is_none() && matches!(self.threshold, Threshold::Auto) && t >= 0.1 * self.horizon {
            self.resolved = Some(10.0 * self.integral);
        }
        if self.crossed_at.is_none() && self.resolved.is_some_and(|level| self.integral > level) {
            self.crossed_at = Some(t);
        }
        Ok(())
    }

    /// Computes the quantity for `snap` and accumulates it.
    pub fn observe<T: Scalar>(&mut self, snap: &Snapshot<'_, T>) -> Result<f64, CriteriaError> {
        let t = snap.state.t.as_f64();
        let value = self.quantity(snap).map_err(|e| match e {
            CriteriaError::Spectral(SpectralError::NonFinite { .. }) => CriteriaError::NonFinite { kind: self.kind, t },
            e => e,
        })?;
        self.accumulate(t, value)?;
        Ok(value)
    }
}

/// Instantaneous integrand of `kind` with exponent `p`.
pub fn quantity<T: Scalar>(kind: CriterionKind, p: f64, snap: &Snapshot<'_, T>) -> Result<f64, CriteriaError> {
    let value = match kind {
        CriterionKind::Bkm => snap.derived.omega.magnitude().max_abs(),
        CriterionKind::PsU => lp_norm(&snap.state.u.magnitude(), p)?,
        CriterionKind::PsGradU => {
            let grad = snap.velocity_gradient();
            let entries: Vec<_> = grad.iter().flatten().collect();
            lp_norm(&pointwise_magnitude(&entries), p)?
        }
        CriterionKind::BesovAniso => {
            let u = &snap.spectral.u;
            let block = [partial(&u.x, 0), partial(&u.x, 1), partial(&u.y, 0), partial(&u.y, 1)];
            let refs: Vec<_> = block.iter().collect();
            besov_norm_vector(&refs, BesovParams::new(0.0, p, 2.0 * p / 3.0)?)?
        }
    };
    Ok(value.as_f64())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionRow {
    pub kind: CriterionKind,
    pub p: f64,
    pub q: f64,
    pub integral: f64,
    pub peak_integrand: f64,
    pub threshold: Option<f64>,
    pub crossed_at: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub rows: Vec<CriterionRow>,
    /// Row indices ordered by crossing time, crossers first. Only filled in
    /// when the run ended with suspected blow-up.
    pub ranking: Option<Vec<usize>>,
}

pub fn report(accs: &[CriterionAccumulator], status: &RunStatus) -> CriteriaReport {
    let rows: Vec<CriterionRow> = accs
        .iter()
        .map(|a| CriterionRow {
            kind: a.kind,
            p: a.p,
            q: a.q,
            integral: a.integral,
            peak_integrand: a.peak,
            threshold: a.resolved,
            crossed_at: a.crossed_at,
        })
        .collect();
    let ranking = matches!(status, RunStatus::BlowUpSuspected(_)).then(|| {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| {
            let key = |i: usize| rows[i].crossed_at.unwrap_or(f64::INFINITY);
            key(a).total_cmp(&key(b))
        });
        order
    });
    CriteriaReport { rows, ranking }
}

/// Observer feeding a set of accumulators, optionally recording every
/// step's integrands and integrals.
#[derive(Clone, Debug)]
pub struct CriteriaMonitor {
    pub accumulators: Vec<CriterionAccumulator>,
    pub series: Vec<CriteriaSample>,
    record: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriteriaSample {
    pub t: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub integrals: Vec<f64>,
}

impl CriteriaMonitor {
    pub fn new(mut accumulators: Vec<CriterionAccumulator>, t_end: f64, record: bool) -> Self {
        for a in &mut accumulators {
            a.set_horizon(t_end);
        }
        Self {
            accumulators,
            series: Vec::new(),
            record,
        }
    }

    pub fn report(&self, status: &RunStatus) -> CriteriaReport {
        report(&self.accumulators, status)
    }
}

impl<T: Scalar> Observer<T> for CriteriaMonitor {
    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<(), ObserverError> {
        let mut values = Vec::with_capacity(self.accumulators.len());
        for acc in &mut self.accumulators {
            match acc.observe(snap) {
                Ok(v) => values.push(v),
                Err(e @ CriteriaError::NonFinite { .. }) => return Err(ObserverError::BlowUp(e.to_string())),
                Err(e) => return Err(ObserverError::Failed(e.to_string())),
            }
        }
        if self.record {
            self.series.push(CriteriaSample {
                t: snap.state.t.as_f64(),
                dt: snap.dt.as_f64(),
                values,
                integrals: self.accumulators.iter().map(|a| a.integral).collect(),
            });
        }
        Ok(())
    }
}
