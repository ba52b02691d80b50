use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::SpectralError;
use crate::scalar::Scalar;

/// Uniform periodic grid on the box `[0, 2π)³` with `n` samples per axis.
///
/// Sample `(i, j, k)` sits at `2π·(i, j, k)/n` and is stored at flat index
/// `i + n·(j + n·k)` (x fastest). The same layout is used for Fourier
/// coefficients, with axis index `i` carrying integer wavenumber
/// `wavenumbers[i]` in `-n/2..n/2`.
pub struct Grid<T: Scalar> {
    n: usize,
    wavenumbers: Vec<i64>,
    retained: Vec<bool>,
    pub(crate) fft_forward: Arc<dyn Fft<T>>,
    pub(crate) fft_inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(n: usize) -> Result<Arc<Self>, SpectralError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::InvalidResolution(n));
        }
        let half = (n / 2) as i64;
        let wavenumbers: Vec<i64> = (0..n as i64).map(|i| if i < half { i } else { i - n as i64 }).collect();
        // 2/3 rule: keep |k| <= n/3 on every axis. The Nyquist row (k = -n/2)
        // always fails this test.
        let retained = wavenumbers
            .iter()
            .map(|&k| 3 * k.unsigned_abs() as usize <= n)
            .collect();
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n);
        let fft_inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(Self {
            n,
            wavenumbers,
            retained,
            fft_forward,
            fft_inverse,
        }))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of samples (and of modes), `n³`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box side, fixed at 2π.
    #[inline]
    pub fn length(&self) -> T {
        T::TAU()
    }

    #[inline]
    pub fn spacing(&self) -> T {
        T::TAU() / T::lit(self.n as f64)
    }

    /// Volume element `(2π/n)³` of the uniform quadrature.
    #[inline]
    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    /// Box volume `(2π)³`.
    #[inline]
    pub fn volume(&self) -> T {
        let l = T::TAU();
        l * l * l
    }

    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    /// Largest retained |k| along one axis.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn axes(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Integer wavevector of the mode stored at `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let (i, j, k) = self.axes(idx);
        [self.wavenumbers[i], self.wavenumbers[j], self.wavenumbers[k]]
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> i64 {
        let [a, b, c] = self.wavevector(idx);
        a * a + b * b + c * c
    }

    /// Flat index of the mode `-k` for the mode at `idx`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (i, j, k) = self.axes(idx);
        self.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    /// Dealiasing mask: true iff every |k_i| <= n/3.
    #[inline]
    pub fn is_retained(&self, idx: usize) -> bool {
        let (i, j, k) = self.axes(idx);
        self.retained[i] && self.retained[j] && self.retained[k]
    }

    /// Whether axis index `i` carries a retained wavenumber.
    #[inline]
    pub fn is_retained_axis(&self, i: usize) -> bool {
        self.retained[i]
    }

    /// Physical coordinate of sample index `i` along one axis.
    #[inline]
    pub fn coordinate(&self, i: usize) -> T {
        self.spacing() * T::lit(i as f64)
    }

    /// Coordinates `(x₁, x₂, x₃)` of the sample at `idx`.
    pub fn position(&self, idx: usize) -> [T; 3] {
        let (i, j, k) = self.axes(idx);
        [self.coordinate(i), self.coordinate(j), self.coordinate(k)]
    }

    /// Largest |k| over retained modes.
    pub fn max_retained_wavenumber(&self) -> T {
        let c = self.dealias_cutoff() as f64;
        T::lit((3.0 * c * c).sqrt())
    }

    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.n == other.n
    }
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_resolution() {
        assert!(matches!(Grid::<f64>::new(4), Err(SpectralError::InvalidResolution(4))));
        assert!(matches!(
            Grid::<f64>::new(12),
            Err(SpectralError::InvalidResolution(12))
        ));
        assert!(Grid::<f64>::new(8).is_ok());
    }

    #[test]
    fn wavenumber_table_and_mask() {
        let g = Grid::<f64>::new(16).unwrap();
        assert_eq!(g.wavenumbers()[0], 0);
        assert_eq!(g.wavenumbers()[7], 7);
        assert_eq!(g.wavenumbers()[8], -8);
        assert_eq!(g.wavenumbers()[15], -1);
        assert_eq!(g.dealias_cutoff(), 5);
        // Nyquist rows are masked.
        assert!(!g.is_retained(g.index(8, 0, 0)));
        assert!(!g.is_retained(g.index(0, 8, 3)));
        assert!(g.is_retained(g.index(5, 11, 0)));
        assert!(!g.is_retained(g.index(6, 0, 0)));
        // Retained set is symmetric under k -> -k.
        for idx in 0..g.len() {
            if g.is_retained(idx) {
                let c = g.conjugate_index(idx);
                assert!(g.is_retained(c));
                let k = g.wavevector(idx);
                let kc = g.wavevector(c);
                assert_eq!([-k[0], -k[1], -k[2]], kc);
            }
        }
    }
}
