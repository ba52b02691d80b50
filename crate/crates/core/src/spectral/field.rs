use std::ops::{Add, Index, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex;

use super::{Grid, SpectralError};
use crate::scalar::Scalar;

/// Scalar field sampled at the `n³` uniform nodes of a grid.
#[derive(Clone, Debug)]
pub struct RealField<T: Scalar> {
    grid: Arc<Grid<T>>,
    samples: Vec<T>,
}

impl<T: Scalar> RealField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self {
            grid: Arc::clone(grid),
            samples: vec![T::zero(); grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid<T>>, value: T) -> Self {
        Self {
            grid: Arc::clone(grid),
            samples: vec![value; grid.len()],
        }
    }

    pub fn from_samples(grid: &Arc<Grid<T>>, samples: Vec<T>) -> Result<Self, SpectralError> {
        if samples.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            samples,
        })
    }

    /// Samples `f(x₁, x₂, x₃)` at every node.
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(T, T, T) -> T) -> Self {
        let samples = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.position(idx);
                f(x, y, z)
            })
            .collect();
        Self {
            grid: Arc::clone(grid),
            samples,
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// First non-finite sample, as `(i, j, k, value)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize, usize, T)> {
        self.samples.iter().position(|x| !x.is_finite()).map(|idx| {
            let (i, j, k) = self.grid.axes(idx);
            (i, j, k, self.samples[idx])
        })
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            samples: self.samples.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self {
            grid: Arc::clone(&self.grid),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|x| x * factor)
    }

    /// Spatial mean `(2π)⁻³ ∫ f`.
    pub fn mean(&self) -> T {
        self.sum() / T::lit(self.samples.len() as f64)
    }

    pub fn sum(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// Uniform-quadrature integral `∑ f · (2π/n)³`.
    pub fn integral(&self) -> T {
        self.sum() * self.grid.cell_volume()
    }

    pub fn min(&self) -> T {
        self.samples.iter().fold(T::infinity(), |a, &b| a.min(b))
    }

    pub fn max(&self) -> T {
        self.samples.iter().fold(T::neg_infinity(), |a, &b| a.max(b))
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }
}

impl<T: Scalar> Index<usize> for RealField<T> {
    type Output = T;

    fn index(&self, idx: usize) -> &T {
        &self.samples[idx]
    }
}

impl<T: Scalar> Add for &RealField<T> {
    type Output = RealField<T>;

    fn add(self, rhs: Self) -> RealField<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &RealField<T> {
    type Output = RealField<T>;

    fn sub(self, rhs: Self) -> RealField<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Mul for &RealField<T> {
    type Output = RealField<T>;

    fn mul(self, rhs: Self) -> RealField<T> {
        self.zip_with(rhs, |a, b| a * b)
    }
}

/// Fourier coefficients of a real field, one per mode of the grid.
///
/// Convention: `f(x) = ∑_k F(k) e^{ik·x}`, so `F(k) = n⁻³ ∑_x f(x) e^{-ik·x}`
/// and a unit-amplitude cosine has coefficients ½ at `±k`. Parseval reads
/// `∫|f|² = (2π)³ ∑|F(k)|²`.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Scalar> {
    grid: Arc<Grid<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    /// Wraps raw coefficients, zeroing every mode outside the dealiasing
    /// mask. Hermitian symmetry is checked lazily by the inverse transform.
    pub fn from_coeffs(grid: &Arc<Grid<T>>, coeffs: Vec<Complex<T>>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        let mut field = Self {
            grid: Arc::clone(grid),
            coeffs,
        };
        field.dealias();
        Ok(field)
    }

    /// Builds a field by evaluating `f` at every retained wavevector.
    pub fn from_modes(grid: &Arc<Grid<T>>, f: impl Fn([i64; 3]) -> Complex<T>) -> Self {
        let coeffs = (0..grid.len())
            .map(|idx| {
                if grid.is_retained(idx) {
                    f(grid.wavevector(idx))
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
            .collect();
        Self {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    pub(crate) fn from_raw(grid: &Arc<Grid<T>>, coeffs: Vec<Complex<T>>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Coefficient at integer wavevector `k`, or zero if `k` is not on the grid.
    pub fn coeff(&self, k: [i64; 3]) -> Complex<T> {
        let n = self.grid.n() as i64;
        let half = n / 2;
        if k.iter().any(|&c| c < -half || c >= half) {
            return Complex::new(T::zero(), T::zero());
        }
        let wrap = |c: i64| c.rem_euclid(n) as usize;
        self.coeffs[self.grid.index(wrap(k[0]), wrap(k[1]), wrap(k[2]))]
    }

    /// Coefficient of the zero mode, i.e. the spatial mean.
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    /// Applies the 2/3-rule mask in place.
    pub fn dealias(&mut self) {
        let zero = Complex::new(T::zero(), T::zero());
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.is_retained(idx) {
                *c = zero;
            }
        }
    }

    /// Returns the field with its mean mode removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex::new(T::zero(), T::zero());
        out
    }

    /// Largest deviation from `F(-k) = conj F(k)`, relative to the larger of
    /// one and the largest coefficient magnitude. The floor keeps roundoff
    /// residue (e.g. a computed curl of a gradient) from reading as broken.
    pub fn hermitian_defect(&self) -> T {
        let scale = self.coeffs.iter().fold(T::one(), |a, c| a.max(c.norm()));
        let mut worst = T::zero();
        for idx in 0..self.coeffs.len() {
            let partner = self.grid.conjugate_index(idx);
            let d = (self.coeffs[partner] - self.coeffs[idx].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    /// Sum `∑ weight(k) |F(k)|²` over all modes.
    pub fn weighted_energy(&self, weight: impl Fn([i64; 3]) -> T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != T::zero() || c.im != T::zero())
            .fold(T::zero(), |acc, (idx, c)| {
                acc + weight(self.grid.wavevector(idx)) * c.norm_sqr()
            })
    }

    /// Mode-wise multiplication by a function of the wavevector.
    pub fn multiply(&self, f: impl Fn([i64; 3]) -> Complex<T>) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if c.re == T::zero() && c.im == T::zero() {
                    c
                } else {
                    c * f(self.grid.wavevector(idx))
                }
            })
            .collect();
        Self::from_raw(&self.grid, coeffs)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::from_raw(&self.grid, self.coeffs.iter().map(|&c| c * factor).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self::from_raw(
            &self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &Self, factor: T) -> Self {
        self.zip_with(other, |a, b| a + b * factor)
    }
}

impl<T: Scalar> Add for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn add(self, rhs: Self) -> SpectralField<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;

    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Three components on one shared grid. Used with either `RealField` or
/// `SpectralField` components.
#[derive(Clone, Debug)]
pub struct VectorField<F> {
    pub x: F,
    pub y: F,
    pub z: F,
}

impl<F> VectorField<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Self { x, y, z }
    }

    pub fn components(&self) -> [&F; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> VectorField<G> {
        VectorField::new(f(&self.x), f(&self.y), f(&self.z))
    }

    pub fn try_map<G, E>(&self, f: impl Fn(&F) -> Result<G, E>) -> Result<VectorField<G>, E> {
        Ok(VectorField::new(f(&self.x)?, f(&self.y)?, f(&self.z)?))
    }
}

impl<T: Scalar> VectorField<RealField<T>> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self::new(RealField::zeros(grid), RealField::zeros(grid), RealField::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.x.grid()
    }

    pub fn check_shared_grid(&self) -> Result<(), SpectralError> {
        check_grids(self.x.grid(), &[self.y.grid(), self.z.grid()])
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> RealField<T> {
        pointwise_magnitude(&[&self.x, &self.y, &self.z])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Scalar> VectorField<SpectralField<T>> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self::new(
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
        )
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.x.grid()
    }

    pub fn check_shared_grid(&self) -> Result<(), SpectralError> {
        check_grids(self.x.grid(), &[self.y.grid(), self.z.grid()])
    }
}

pub(crate) fn check_grids<T: Scalar>(a: &Grid<T>, others: &[&Arc<Grid<T>>]) -> Result<(), SpectralError> {
    for g in others {
        if !a.same_as(g) {
            return Err(SpectralError::GridMismatch {
                left: a.n(),
                right: g.n(),
            });
        }
    }
    Ok(())
}

/// Pointwise Euclidean magnitude of any number of components.
pub fn pointwise_magnitude<T: Scalar>(parts: &[&RealField<T>]) -> RealField<T> {
    let grid = parts[0].grid();
    let samples = (0..grid.len())
        .map(|idx| parts.iter().fold(T::zero(), |acc, f| acc + f[idx] * f[idx]).sqrt())
        .collect();
    RealField {
        grid: Arc::clone(grid),
        samples,
    }
}
