//! Named initial conditions.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::solver::State;
use crate::spectral::random::random_spectrum;
use crate::spectral::{
    backward_unchecked, l2_norm_sq, leray_project, Grid, RealField, RealVector, SpectralError, VectorField,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresetError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Taylor–Green velocity at time `t`, `(sin x cos y, −cos x sin y, 0)·e^{−2t}`.
/// An exact solution with uncharged fluid.
pub fn taylor_green_exact<T: Scalar>(grid: &Arc<Grid<T>>, t: T) -> RealVector<T> {
    let decay = (T::lit(-2.0) * t).exp();
    VectorField::new(
        RealField::from_fn(grid, |x, y, _| x.sin() * y.cos() * decay),
        RealField::from_fn(grid, |x, y, _| -x.cos() * y.sin() * decay),
        RealField::zeros(grid),
    )
}

/// Taylor–Green vortex with `v = w = 0`.
pub fn taylor_green<T: Scalar>(grid: &Arc<Grid<T>>) -> State<T> {
    State {
        u: taylor_green_exact(grid, T::zero()),
        ..State::zeros(grid)
    }
}

/// Fluid at rest with `v = 1 + ½ sin x`, `w = 1 + ½ sin y`.
pub fn charged_shear<T: Scalar>(grid: &Arc<Grid<T>>) -> State<T> {
    let half = T::lit(0.5);
    State {
        v: RealField::from_fn(grid, |x, _, _| T::one() + half * x.sin()),
        w: RealField::from_fn(grid, |_, y, _| T::one() + half * y.sin()),
        ..State::zeros(grid)
    }
}

/// Random divergence-free velocity with spectrum peaked near `peak_k`,
/// scaled so that `‖u‖²_{L²} = energy`, and charges `1 + ½g/max|g|` for
/// independent mean-free random `g`. Deterministic in `seed`.
pub fn random_smooth<T: Scalar>(
    grid: &Arc<Grid<T>>,
    seed: u64,
    energy: f64,
    peak_k: f64,
) -> Result<State<T>, PresetError> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(PresetError::InvalidParameter(format!(
            "energy must be finite and >= 0, got {energy}"
        )));
    }
    if !(peak_k.is_finite() && peak_k > 0.0) {
        return Err(PresetError::InvalidParameter(format!(
            "peak wavenumber must be > 0, got {peak_k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = |k: f64| k * (-(k / peak_k).powi(2)).exp();
    let raw = VectorField::new(
        random_spectrum(grid, &mut rng, profile),
        random_spectrum(grid, &mut rng, profile),
        random_spectrum(grid, &mut rng, profile),
    );
    let u_hat = leray_project(&raw)?;
    let current: T = u_hat
        .components()
        .iter()
        .map(|c| l2_norm_sq(c))
        .fold(T::zero(), |a, b| a + b);
    let factor = if current > T::zero() {
        (T::lit(energy) / current).sqrt()
    } else {
        T::zero()
    };
    let u = u_hat.map(|c| backward_unchecked(&c.scale(factor)));

    let charge = |rng: &mut ChaCha8Rng| {
        let g = backward_unchecked(&random_spectrum(grid, rng, |k| 1.0 / (1.0 + k * k)).without_mean());
        let peak = g.max_abs();
        let half = T::lit(0.5);
        g.map(|x| T::one() + if peak > T::zero() { half * x / peak } else { T::zero() })
    };
    let v = charge(&mut rng);
    let w = charge(&mut rng);
    Ok(State::new(u, v, w)?)
}
