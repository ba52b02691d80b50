//! Random band-limited fields for tests, property checks and presets.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::transform::backward_unchecked;
use super::{Grid, RealField, SpectralField};
use crate::scalar::Scalar;

/// Hermitian-symmetric random coefficients on the retained modes, with
/// amplitudes `a(|k|)` supplied by the caller.
pub fn random_spectrum<T: Scalar, R: Rng + ?Sized>(
    grid: &Arc<Grid<T>>,
    rng: &mut R,
    amplitude: impl Fn(f64) -> f64,
) -> SpectralField<T> {
    let len = grid.len();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); len];
    for idx in 0..len {
        let partner = grid.conjugate_index(idx);
        if partner < idx || !grid.is_retained(idx) {
            continue;
        }
        let kk = (grid.k_squared(idx) as f64).sqrt();
        let a = amplitude(kk);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if partner == idx {
            coeffs[idx] = Complex::new(T::lit(a * re), T::zero());
        } else {
            let c = Complex::new(T::lit(a * re), T::lit(a * im));
            coeffs[idx] = c;
            coeffs[partner] = c.conj();
        }
    }
    SpectralField::from_raw(grid, coeffs)
}

/// Random real field whose spectrum lies inside the dealiasing mask.
pub fn random_band_limited<T: Scalar, R: Rng + ?Sized>(grid: &Arc<Grid<T>>, rng: &mut R) -> RealField<T> {
    let spectrum = random_spectrum(grid, rng, |k| 1.0 / (1.0 + 0.25 * k * k));
    backward_unchecked(&spectrum)
}
