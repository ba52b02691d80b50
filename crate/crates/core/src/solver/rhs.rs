//! Nonlinear and coupling terms of the system with unit parameters:
//!
//! ```text
//! ∂ₜu + (u·∇)u − Δu + ∇Π = ΔΨ∇Ψ,   ∇·u = 0,
//! ∂ₜv + (u·∇)v = Δv − ∇·(v∇Ψ),
//! ∂ₜw + (u·∇)w = Δw + ∇·(w∇Ψ),
//! ΔΨ = v − w.
//! ```
//!
//! Diffusion is left to the integrator. Advection is written in divergence
//! form, which equals the convective form for solenoidal `u` and keeps the
//! mean of each charge density exactly constant.

use num_complex::Complex;

use super::state::{SpectralState, State};
use crate::scalar::Scalar;
use crate::spectral::{
    backward_many, backward_unchecked, forward_many, gradient, leray_project, RealField, RealVector, SpectralError,
    SpectralField, VectorField,
};

/// Sampled fields the nonlinear terms are built from.
pub(crate) struct Physical<T: Scalar> {
    pub u: RealVector<T>,
    pub v: RealField<T>,
    pub w: RealField<T>,
    pub grad_psi: RealVector<T>,
}

impl<T: Scalar> Physical<T> {
    pub fn from_spectral(s: &SpectralState<T>) -> Result<Self, SpectralError> {
        let psi_hat = s.potential()?;
        let g = gradient(&psi_hat);
        // Transforms are paired; velocity and charge groups are kept apart
        // so that identically zero charges stay exactly zero.
        let [ux, uy, uz, gx, gy, gz, v, w]: [RealField<T>; 8] =
            backward_many(&[&s.u.x, &s.u.y, &s.u.z, &g.x, &g.y, &g.z, &s.v, &s.w])
                .try_into()
                .expect("eight fields");
        Ok(Self {
            u: VectorField::new(ux, uy, uz),
            v,
            w,
            grad_psi: VectorField::new(gx, gy, gz),
        })
    }
}

/// `−i k·F̂` for three flux coefficient fields.
fn neg_divergence<T: Scalar>(hats: [&SpectralField<T>; 3]) -> SpectralField<T> {
    let grid = hats[0].grid().clone();
    let n = grid.n();
    let kt: Vec<T> = grid.wavenumbers().iter().map(|&k| T::lit(k as f64)).collect();
    let [a, b, c] = hats.map(|h| h.coeffs());
    let mut out = SpectralField::zeros(&grid);
    let coeffs = out.coeffs_mut();
    for (idx, slot) in coeffs.iter_mut().enumerate() {
        let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
        // −i(k·F) = (k·F).im − i (k·F).re
        let dot = a[idx] * kt[i] + b[idx] * kt[j] + c[idx] * kt[k];
        *slot = Complex::new(dot.im, -dot.re);
    }
    out
}

/// Tendencies of `(u, v, w)` excluding diffusion.
pub(crate) fn tendencies<T: Scalar>(s: &SpectralState<T>) -> Result<SpectralState<T>, SpectralError> {
    tendencies_from(&Physical::from_spectral(s)?)
}

pub(crate) fn tendencies_from<T: Scalar>(p: &Physical<T>) -> Result<SpectralState<T>, SpectralError> {
    let (u, v, w, gp) = (&p.u, &p.v, &p.w, &p.grad_psi);
    let eta = v - w;

    // Momentum: −∇·(u⊗u) + η∇Ψ, then projected. Charges: v is carried by
    // u + ∇Ψ, w by u − ∇Ψ. The forward transforms dealias the products.
    let drift_v = [&u.x + &gp.x, &u.y + &gp.y, &u.z + &gp.z];
    let drift_w = [&u.x - &gp.x, &u.y - &gp.y, &u.z - &gp.z];
    let products = [
        &u.x * &u.x,
        &u.x * &u.y,
        &u.x * &u.z,
        &u.y * &u.y,
        &u.y * &u.z,
        &u.z * &u.z,
        &eta * &gp.x,
        &eta * &gp.y,
        &eta * &gp.z,
        v * &drift_v[0],
        v * &drift_v[1],
        v * &drift_v[2],
        w * &drift_w[0],
        w * &drift_w[1],
        w * &drift_w[2],
    ];
    let refs: Vec<_> = products.iter().collect();
    let h = forward_many(&refs);
    let row = |a: usize, b: usize, c: usize| [&h[a], &h[b], &h[c]];
    let momentum = VectorField::new(
        &neg_divergence(row(0, 1, 2)) + &h[6],
        &neg_divergence(row(1, 3, 4)) + &h[7],
        &neg_divergence(row(2, 4, 5)) + &h[8],
    );
    Ok(SpectralState {
        u: leray_project(&momentum)?,
        v: neg_divergence(row(9, 10, 11)),
        w: neg_divergence(row(12, 13, 14)),
    })
}

/// Projected momentum forcing `P[−(u·∇)u + ΔΨ∇Ψ]`, dealiased, in samples.
pub fn momentum_rhs<T: Scalar>(s: &State<T>) -> Result<RealVector<T>, SpectralError> {
    let rhs = tendencies(&s.to_spectral()?)?;
    Ok(rhs.u.map(backward_unchecked))
}

/// Charge tendencies `(−∇·(uv) − ∇·(v∇Ψ), −∇·(uw) + ∇·(w∇Ψ))`.
pub fn charge_rhs<T: Scalar>(s: &State<T>) -> Result<(RealField<T>, RealField<T>), SpectralError> {
    let rhs = tendencies(&s.to_spectral()?)?;
    Ok((backward_unchecked(&rhs.v), backward_unchecked(&rhs.w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::spectral::random::random_band_limited;
    use crate::spectral::{Grid, RealVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quiescent_neutral_state_has_no_forcing() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut s = State::zeros(&g);
        s.v = RealField::from_fn(&g, |x, y, _| 1.0 + 0.3 * (x + y).sin());
        s.w = s.v.clone();
        let m = momentum_rhs(&s).unwrap();
        assert!(m.components().iter().all(|c| c.max_abs() < 1e-14));
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let g = Grid::<f64>::new(16).unwrap();
        let s = presets::taylor_green(&g);
        let m = momentum_rhs(&s).unwrap();
        assert!(m.components().iter().all(|c| c.max_abs() < 1e-10));
    }

    #[test]
    fn one_dimensional_coulomb_force_is_a_gradient() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut s = State::zeros(&g);
        s.v = RealField::from_fn(&g, |x, _, _| 1.0 + x.sin());
        s.w = RealField::constant(&g, 1.0);
        let m = momentum_rhs(&s).unwrap();
        assert!(m.components().iter().all(|c| c.max_abs() < 1e-10));
    }

    #[test]
    fn uniform_charges_are_steady() {
        let g = Grid::<f64>::new(8).unwrap();
        let mut s = State::zeros(&g);
        s.v = RealField::constant(&g, 2.0);
        s.w = RealField::constant(&g, 2.0);
        let (dv, dw) = charge_rhs(&s).unwrap();
        assert!(dv.max_abs() == 0.0 && dw.max_abs() == 0.0);
    }

    #[test]
    fn charge_tendencies_are_mean_free() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut s = State::zeros(&g);
        s.v = RealField::from_fn(&g, |x, _, _| 1.0 + 0.5 * x.sin());
        s.w = RealField::constant(&g, 1.0);
        let (dv, dw) = charge_rhs(&s).unwrap();
        assert!(dv.mean().abs() < 1e-12 && dw.mean().abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let u = RealVector::new(
                random_band_limited(&g, &mut rng),
                random_band_limited(&g, &mut rng),
                random_band_limited(&g, &mut rng),
            );
            let u = crate::spectral::forward_vector(&u).unwrap();
            let u = leray_project(&u).unwrap().map(backward_unchecked);
            let v = random_band_limited(&g, &mut rng).map(|x| x + 3.0);
            let w0 = random_band_limited(&g, &mut rng);
            let shift = v.mean() - w0.mean();
            let w = w0.map(|x| x + shift);
            let s = State::new(u, v, w).unwrap();
            let (dv, dw) = charge_rhs(&s).unwrap();
            assert!(dv.mean().abs() < 1e-12 && dw.mean().abs() < 1e-12);
        }
    }
}
