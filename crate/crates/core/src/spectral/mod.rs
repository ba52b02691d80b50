//! Periodic fields on `[0, 2π)³`, their Fourier representation and the
//! spectral operators built on it.

mod field;
mod grid;
mod norms;
mod ops;
pub mod random;
mod transform;

use thiserror::Error;

pub use field::{pointwise_magnitude, RealField, SpectralField, VectorField};
pub use grid::Grid;
pub use norms::{gradient_norm_sq, l2_norm_sq, lp_norm, sobolev_norm, spectral_tail_fraction};
pub use ops::{curl, divergence, gradient, laplacian, leray_project, partial, same_grid, solve_poisson};
pub use transform::{backward_transform, forward_transform};

pub(crate) use transform::{backward_many, backward_unchecked, forward_many};

pub type RealVector<T> = VectorField<RealField<T>>;
pub type SpectralVector<T> = VectorField<SpectralField<T>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid resolution {0} must be a power of two and at least 8")]
    InvalidResolution(usize),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample {value} at node ({i}, {j}, {k})")]
    NonFinite { i: usize, j: usize, k: usize, value: f64 },
    #[error("coefficients violate Hermitian symmetry (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("fields live on different grids (n = {left} vs n = {right})")]
    GridMismatch { left: usize, right: usize },
    #[error("net charge {net_charge:e} exceeds neutrality tolerance {tolerance:e}")]
    NotNeutral { net_charge: f64, tolerance: f64 },
    #[error("Lebesgue exponent p = {0} must satisfy p >= 1")]
    InvalidExponent(f64),
    #[error("Sobolev index s = {0} must be nonnegative")]
    InvalidRegularity(f64),
}

/// Forward transform of every component.
pub fn forward_vector<T: crate::Scalar>(u: &RealVector<T>) -> Result<SpectralVector<T>, SpectralError> {
    u.check_shared_grid()?;
    u.try_map(forward_transform)
}

/// Inverse transform of every component.
pub fn backward_vector<T: crate::Scalar>(u: &SpectralVector<T>) -> Result<RealVector<T>, SpectralError> {
    u.check_shared_grid()?;
    u.try_map(backward_transform)
}
