//! Time integration of the coupled Navier–Stokes / Poisson–Nernst–Planck
//! system on the periodic box.

mod rhs;
mod run;
mod state;
mod step;

use thiserror::Error;

pub use rhs::{charge_rhs, momentum_rhs};
pub use run::{run, Observer, ObserverError, RunReport, RunStatus, Snapshot, DIVERGENCE_TOL, MEAN_DRIFT_TOL};
pub use state::{DerivedFields, SpectralState, State};
pub use step::{advance, step, StepControl};

use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("step size {dt:e} fell below dt_min = {dt_min:e} at t = {t}")]
    StepCollapse { dt: f64, dt_min: f64, t: f64 },
    #[error("non-finite field values after the step ending at t = {t}")]
    NonFinite { t: f64 },
    #[error("observer failed: {0}")]
    Observer(String),
}
