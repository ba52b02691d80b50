//! Spectral differential operators, the Leray projector and the periodic
//! Poisson solve. Every operator is a mode-wise multiplier, so Hermitian
//! symmetry and the dealiasing mask are preserved exactly.

use num_complex::Complex;

use super::field::check_grids;
use super::{SpectralError, SpectralField, SpectralVector};
use crate::scalar::Scalar;

#[inline]
fn ik<T: Scalar>(k: i64) -> Complex<T> {
    Complex::new(T::zero(), T::lit(k as f64))
}

/// `∂_axis F`, i.e. multiplication by `i k_axis`.
pub fn partial<T: Scalar>(f: &SpectralField<T>, axis: usize) -> SpectralField<T> {
    f.multiply(|k| ik(k[axis]))
}

pub fn gradient<T: Scalar>(f: &SpectralField<T>) -> SpectralVector<T> {
    SpectralVector::new(partial(f, 0), partial(f, 1), partial(f, 2))
}

pub fn divergence<T: Scalar>(u: &SpectralVector<T>) -> Result<SpectralField<T>, SpectralError> {
    u.check_shared_grid()?;
    let dx = partial(&u.x, 0);
    let dy = partial(&u.y, 1);
    let dz = partial(&u.z, 2);
    Ok(&(&dx + &dy) + &dz)
}

pub fn laplacian<T: Scalar>(f: &SpectralField<T>) -> SpectralField<T> {
    f.multiply(|k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        Complex::new(T::lit(-k2), T::zero())
    })
}

pub fn curl<T: Scalar>(u: &SpectralVector<T>) -> Result<SpectralVector<T>, SpectralError> {
    u.check_shared_grid()?;
    let x = &partial(&u.z, 1) - &partial(&u.y, 2);
    let y = &partial(&u.x, 2) - &partial(&u.z, 0);
    let z = &partial(&u.y, 0) - &partial(&u.x, 1);
    Ok(SpectralVector::new(x, y, z))
}

/// Orthogonal projection onto divergence-free fields:
/// `û ↦ û − k (k·û)/|k|²`. The mean mode passes through unchanged.
pub fn leray_project<T: Scalar>(u: &SpectralVector<T>) -> Result<SpectralVector<T>, SpectralError> {
    u.check_shared_grid()?;
    let grid = u.grid();
    let len = grid.len();
    let (mut x, mut y, mut z) = (u.x.clone(), u.y.clone(), u.z.clone());
    let (cx, cy, cz) = (x.coeffs_mut(), y.coeffs_mut(), z.coeffs_mut());
    for idx in 0..len {
        let k2 = grid.k_squared(idx);
        if k2 == 0 {
            continue;
        }
        let [a, b, c] = grid.wavevector(idx).map(|v| T::lit(v as f64));
        let dot = cx[idx] * a + cy[idx] * b + cz[idx] * c;
        let s = dot / T::lit(k2 as f64);
        cx[idx] = cx[idx] - s * a;
        cy[idx] = cy[idx] - s * b;
        cz[idx] = cz[idx] - s * c;
    }
    Ok(SpectralVector::new(x, y, z))
}

/// Solves `ΔΨ = η` on the torus with the zero-mean gauge. `η` must be
/// neutral: its mean mode may not exceed the scalar type's neutrality
/// tolerance.
pub fn solve_poisson<T: Scalar>(eta: &SpectralField<T>) -> Result<SpectralField<T>, SpectralError> {
    let net = eta.coeffs()[0];
    if !(net.norm().as_f64() <= T::NEUTRALITY_TOL) {
        return Err(SpectralError::NotNeutral {
            net_charge: net.re.as_f64(),
            tolerance: T::NEUTRALITY_TOL,
        });
    }
    Ok(inverse_laplacian(eta))
}

/// `Δ⁻¹` on mean-free fields; the mean mode is discarded.
pub(crate) fn inverse_laplacian<T: Scalar>(f: &SpectralField<T>) -> SpectralField<T> {
    let mut out = f.multiply(|k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(-T::one() / T::lit(k2 as f64), T::zero())
        }
    });
    out.coeffs_mut()[0] = Complex::new(T::zero(), T::zero());
    out
}

/// Checks that two spectral fields live on the same grid.
pub fn same_grid<T: Scalar>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<(), SpectralError> {
    check_grids(a.grid(), &[b.grid()])
}
