use std::sync::Arc;

use crate::scalar::Scalar;
use crate::spectral::{
    backward_many, backward_unchecked, curl, divergence, forward_transform, gradient, solve_poisson, Grid, RealField,
    RealVector, SpectralError, SpectralField, SpectralVector, VectorField,
};

/// Solution triple `(u, v, w)` at time `t`: velocity and the negative and
/// positive charge densities, sampled on one grid.
#[derive(Clone, Debug)]
pub struct State<T: Scalar> {
    pub u: RealVector<T>,
    pub v: RealField<T>,
    pub w: RealField<T>,
    pub t: T,
    pub step_index: u64,
}

impl<T: Scalar> State<T> {
    pub fn new(u: RealVector<T>, v: RealField<T>, w: RealField<T>) -> Result<Self, SpectralError> {
        u.check_shared_grid()?;
        crate::spectral::VectorField::new(u.x.clone(), v.clone(), w.clone()).check_shared_grid()?;
        Ok(Self {
            u,
            v,
            w,
            t: T::zero(),
            step_index: 0,
        })
    }

    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self {
            u: RealVector::zeros(grid),
            v: RealField::zeros(grid),
            w: RealField::zeros(grid),
            t: T::zero(),
            step_index: 0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.u.x.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }

    pub fn to_spectral(&self) -> Result<SpectralState<T>, SpectralError> {
        Ok(SpectralState {
            u: self.u.try_map(forward_transform)?,
            v: forward_transform(&self.v)?,
            w: forward_transform(&self.w)?,
        })
    }

    /// Grid maximum of `|∇·u|`.
    pub fn divergence_max(&self) -> Result<T, SpectralError> {
        Ok(self.to_spectral()?.divergence_max())
    }

    /// Net charge `mean(v − w)`.
    pub fn net_charge(&self) -> T {
        self.v.mean() - self.w.mean()
    }

    pub fn min_charge(&self) -> T {
        self.v.min().min(self.w.min())
    }
}

/// Fourier coefficients of a state; the representation the integrator
/// advances.
#[derive(Clone, Debug)]
pub struct SpectralState<T: Scalar> {
    pub u: SpectralVector<T>,
    pub v: SpectralField<T>,
    pub w: SpectralField<T>,
}

impl<T: Scalar> SpectralState<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.v.grid()
    }

    pub fn to_real(&self, t: T, step_index: u64) -> State<T> {
        let [v, w, x, y, z]: [RealField<T>; 5] = backward_many(&[&self.v, &self.w, &self.u.x, &self.u.y, &self.u.z])
            .try_into()
            .expect("five fields");
        State {
            u: VectorField::new(x, y, z),
            v,
            w,
            t,
            step_index,
        }
    }

    pub fn divergence_max(&self) -> T {
        let div = divergence(&self.u).expect("state components share a grid");
        backward_unchecked(&div).max_abs()
    }

    /// `η = v − w` in coefficient space.
    pub fn eta(&self) -> SpectralField<T> {
        &self.v - &self.w
    }

    pub fn potential(&self) -> Result<SpectralField<T>, SpectralError> {
        solve_poisson(&self.eta())
    }

    /// Componentwise `a + factor · b`.
    pub(crate) fn add_scaled(&self, other: &Self, factor: T) -> Self {
        Self {
            u: VectorField::new(
                self.u.x.add_scaled(&other.u.x, factor),
                self.u.y.add_scaled(&other.u.y, factor),
                self.u.z.add_scaled(&other.u.z, factor),
            ),
            v: self.v.add_scaled(&other.v, factor),
            w: self.w.add_scaled(&other.w, factor),
        }
    }

    pub(crate) fn map_fields(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Self {
        Self {
            u: self.u.map(&f),
            v: f(&self.v),
            w: f(&self.w),
        }
    }
}

/// Fields derived from a state: potential `Ψ` with `ΔΨ = v − w`, its
/// gradient, vorticity `ω = ∇×u`, and the symmetrized charges
/// `ζ = v + w`, `η = v − w`.
#[derive(Clone, Debug)]
pub struct DerivedFields<T: Scalar> {
    pub psi: RealField<T>,
    pub grad_psi: RealVector<T>,
    pub omega: RealVector<T>,
    pub zeta: RealField<T>,
    pub eta: RealField<T>,
    pub psi_hat: SpectralField<T>,
}

impl<T: Scalar> DerivedFields<T> {
    pub fn compute(state: &State<T>, spectral: &SpectralState<T>) -> Result<Self, SpectralError> {
        let psi_hat = spectral.potential()?;
        let o = curl(&spectral.u)?;
        let g = gradient(&psi_hat);
        let [psi, gx, gy, gz, ox, oy, oz]: [RealField<T>; 7] =
            backward_many(&[&psi_hat, &g.x, &g.y, &g.z, &o.x, &o.y, &o.z])
                .try_into()
                .expect("seven fields");
        Ok(Self {
            psi,
            grad_psi: VectorField::new(gx, gy, gz),
            omega: VectorField::new(ox, oy, oz),
            zeta: &state.v + &state.w,
            eta: &state.v - &state.w,
            psi_hat,
        })
    }
}
