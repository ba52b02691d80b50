//! Three-dimensional discrete Fourier transforms between samples and
//! coefficients.
//!
//! One-dimensional FFTs are applied axis by axis; lines along an axis are
//! independent and processed in parallel. Each line is transformed by the
//! same plan regardless of thread assignment, so results are bitwise
//! independent of the thread count.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::Fft;

use super::{Grid, RealField, SpectralError, SpectralField};
use crate::scalar::Scalar;

const MIN_LINES_PER_TASK: usize = 64;

fn fft_lines<T: Scalar>(fft: &Arc<dyn Fft<T>>, data: &mut [Complex<T>], n: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(n * MIN_LINES_PER_TASK).for_each_init(
        || vec![Complex::new(T::zero(), T::zero()); scratch_len],
        |scratch, block| fft.process_with_scratch(block, scratch),
    );
}

/// Gathers the lines starting at `bases` with element stride `stride` into
/// contiguous storage, transforms them and scatters them back.
fn fft_strided<T: Scalar>(
    fft: &Arc<dyn Fft<T>>,
    data: &mut [Complex<T>],
    buf: &mut Vec<Complex<T>>,
    bases: &[usize],
    n: usize,
    stride: usize,
) {
    buf.clear();
    for &base in bases {
        buf.extend((0..n).map(|m| data[base + m * stride]));
    }
    fft_lines(fft, buf, n);
    for (&base, line) in bases.iter().zip(buf.chunks_exact(n)) {
        for (m, x) in line.iter().enumerate() {
            data[base + m * stride] = *x;
        }
    }
}

/// Unnormalized in-place 3-D transform in the direction of `fft`.
///
/// Modes outside the dealiasing mask are zero on input to the inverse
/// transform and discarded after the forward one, so lines that only carry
/// such modes are skipped: the inverse runs z, y, x and skips lines whose
/// fixed wavenumbers are masked; the forward runs x, y, z likewise.
fn fft3<T: Scalar>(grid: &Grid<T>, fft: &Arc<dyn Fft<T>>, data: &mut [Complex<T>], inverse: bool) {
    let n = grid.n();
    let nn = n * n;
    let kept: Vec<usize> = (0..n).filter(|&i| grid.is_retained_axis(i)).collect();
    let all: Vec<usize> = (0..n).collect();
    // y-lines fixed by (x index, z index): x must be retained.
    let y_bases: Vec<usize> = all
        .iter()
        .flat_map(|&k| kept.iter().map(move |&i| i + nn * k))
        .collect();
    // z-lines fixed by (x index, y index): both retained.
    let z_bases: Vec<usize> = kept
        .iter()
        .flat_map(|&j| kept.iter().map(move |&i| i + n * j))
        .collect();
    let mut buf = Vec::with_capacity(data.len());
    if inverse {
        fft_strided(fft, data, &mut buf, &z_bases, n, nn);
        fft_strided(fft, data, &mut buf, &y_bases, n, n);
        fft_lines(fft, data, n);
    } else {
        fft_lines(fft, data, n);
        fft_strided(fft, data, &mut buf, &y_bases, n, n);
        fft_strided(fft, data, &mut buf, &z_bases, n, nn);
    }
}

/// Samples to coefficients. The result is dealiased: modes outside the
/// 2/3-rule mask are dropped.
pub fn forward_transform<T: Scalar>(f: &RealField<T>) -> Result<SpectralField<T>, SpectralError> {
    if let Some((i, j, k, value)) = f.first_non_finite() {
        return Err(SpectralError::NonFinite {
            i,
            j,
            k,
            value: value.as_f64(),
        });
    }
    Ok(forward_unchecked(f))
}

pub(crate) fn forward_unchecked<T: Scalar>(f: &RealField<T>) -> SpectralField<T> {
    let grid = f.grid();
    let mut data: Vec<Complex<T>> = f.samples().iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft3(grid, &grid.fft_forward, &mut data, false);
    let norm = T::one() / T::lit(grid.len() as f64);
    let zero = Complex::new(T::zero(), T::zero());
    for (idx, c) in data.iter_mut().enumerate() {
        *c = if grid.is_retained(idx) { *c * norm } else { zero };
    }
    SpectralField::from_raw(grid, data)
}

/// Coefficients to samples. Rejects coefficient sets that do not describe
/// a real field.
pub fn backward_transform<T: Scalar>(f: &SpectralField<T>) -> Result<RealField<T>, SpectralError> {
    let defect = f.hermitian_defect();
    if !(defect.as_f64() <= T::SYMMETRY_TOL) {
        return Err(SpectralError::NotHermitian {
            defect: defect.as_f64(),
        });
    }
    Ok(backward_unchecked(f))
}

/// Inverse transform without the Hermitian check. Callers guarantee the
/// input came from real data through symmetry-preserving operations.
pub(crate) fn backward_unchecked<T: Scalar>(f: &SpectralField<T>) -> RealField<T> {
    let grid = f.grid();
    let mut data = f.coeffs().to_vec();
    fft3(grid, &grid.fft_inverse, &mut data, true);
    let samples = data.into_iter().map(|c| c.re).collect();
    RealField::from_samples(grid, samples).expect("length preserved")
}

/// Forward transforms of several real fields, two per complex FFT.
pub(crate) fn forward_many<T: Scalar>(fields: &[&RealField<T>]) -> Vec<SpectralField<T>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        match pair {
            [a, b] => {
                let (fa, fb) = forward_pair(a, b);
                out.push(fa);
                out.push(fb);
            }
            [a] => out.push(forward_unchecked(a)),
            _ => unreachable!(),
        }
    }
    out
}

/// Transforms `a + ib` once and separates the two spectra through
/// `A(k) = (C(k) + C̄(−k))/2`, `B(k) = (C(k) − C̄(−k))/2i`.
fn forward_pair<T: Scalar>(a: &RealField<T>, b: &RealField<T>) -> (SpectralField<T>, SpectralField<T>) {
    let grid = a.grid();
    let mut data: Vec<Complex<T>> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| Complex::new(x, y))
        .collect();
    fft3(grid, &grid.fft_forward, &mut data, false);
    let half = T::lit(0.5) / T::lit(grid.len() as f64);
    let zero = Complex::new(T::zero(), T::zero());
    let mut fa = vec![zero; data.len()];
    let mut fb = vec![zero; data.len()];
    let n = grid.n();
    let mirror = |i: usize| (n - i) % n;
    for k in (0..n).filter(|&k| grid.is_retained_axis(k)) {
        for j in (0..n).filter(|&j| grid.is_retained_axis(j)) {
            for i in (0..n).filter(|&i| grid.is_retained_axis(i)) {
                let idx = grid.index(i, j, k);
                let c = data[idx];
                let cp = data[grid.index(mirror(i), mirror(j), mirror(k))].conj();
                fa[idx] = (c + cp) * half;
                let d = (c - cp) * half;
                fb[idx] = Complex::new(d.im, -d.re);
            }
        }
    }
    (SpectralField::from_raw(grid, fa), SpectralField::from_raw(grid, fb))
}

/// Inverse transforms of several spectra, two per complex FFT.
pub(crate) fn backward_many<T: Scalar>(fields: &[&SpectralField<T>]) -> Vec<RealField<T>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        match pair {
            [a, b] => {
                let grid = a.grid();
                let mut data: Vec<Complex<T>> = a
                    .coeffs()
                    .iter()
                    .zip(b.coeffs())
                    .map(|(&x, &y)| Complex::new(x.re - y.im, x.im + y.re))
                    .collect();
                fft3(grid, &grid.fft_inverse, &mut data, true);
                let (re, im): (Vec<T>, Vec<T>) = data.into_iter().map(|c| (c.re, c.im)).unzip();
                out.push(RealField::from_samples(grid, re).expect("length preserved"));
                out.push(RealField::from_samples(grid, im).expect("length preserved"));
            }
            [a] => out.push(backward_unchecked(a)),
            _ => unreachable!(),
        }
    }
    out
}
