//! Pseudo-spectral simulation of the periodic Navier–Stokes–Poisson–Nernst–Planck
//! system, with running blow-up criterion functionals and energy audits.
//!
//! All fields are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the solver, the
//! audits and the checkpoint format are calibrated for.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod checkpoint;
pub mod criteria;
pub mod littlewood_paley;
pub mod presets;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use scalar::Scalar;

pub type Grid = spectral::Grid<f64>;
pub type RealField = spectral::RealField<f64>;
pub type SpectralField = spectral::SpectralField<f64>;
pub type RealVector = spectral::RealVector<f64>;
pub type SpectralVector = spectral::SpectralVector<f64>;
pub type State = solver::State<f64>;
pub type StepControl = solver::StepControl<f64>;
pub type SpectralState = solver::SpectralState<f64>;
pub type DerivedFields = solver::DerivedFields<f64>;
pub type RunReport = solver::RunReport<f64>;
