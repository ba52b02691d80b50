//! Dyadic frequency decomposition, homogeneous Besov norms and Bernstein
//! inequality measurements on the periodic grid.
//!
//! The decomposition multiplies coefficients by `varphi(2^{-j}|k|)` where
//! `varphi(ξ) = phi(ξ) − phi(2ξ)` and `phi` is the radial cutoff of
//! [`cutoff`]. On the torus the only polynomial modulo which the sum
//! `∑_j Δ_j f` reconstructs `f` is the constant, so the mean mode is
//! excluded from every band.

mod bernstein;
pub mod cutoff;

use num_complex::Complex;
use thiserror::Error;

pub use bernstein::{bernstein_check, BernsteinReport};

use crate::scalar::Scalar;
use crate::spectral::{backward_many, lp_norm, pointwise_magnitude, Grid, SpectralError, SpectralField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesovError {
    #[error("exponent {name} = {value} outside [1, ∞]")]
    Exponent { name: &'static str, value: f64 },
    #[error("regularity index s = {0} is not finite")]
    Regularity(f64),
    #[error("band j = {j} is not representable on this grid (bands {j_min}..={j_max})")]
    BandNotRepresentable { j: i32, j_min: i32, j_max: i32 },
    #[error("derivative order {0} is too large")]
    DerivativeOrder(u32),
    #[error("exponents must satisfy 1 <= p <= q <= ∞ (p = {p}, q = {q})")]
    ExponentOrder { p: f64, q: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Parameters `(s, p, r)` of the homogeneous Besov norm `Ḃ^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self, BesovError> {
        if !s.is_finite() {
            return Err(BesovError::Regularity(s));
        }
        for (name, value) in [("p", p), ("r", r)] {
            if value.is_nan() || value < 1.0 {
                return Err(BesovError::Exponent { name, value });
            }
        }
        Ok(Self { s, p, r })
    }
}

/// One Littlewood–Paley block `Δ_j f`.
#[derive(Clone, Debug)]
pub struct DyadicBand<T: Scalar> {
    pub j: i32,
    pub field: SpectralField<T>,
}

/// Band indices that carry grid-representable frequencies: `j_min` is the
/// first band reaching `|ξ| >= 1`, `j_max` the last one whose annulus meets
/// the dealiased range `|ξ| <= n/3`.
pub fn band_range<T: Scalar>(grid: &Grid<T>) -> (i32, i32) {
    let mut j_min = 0;
    while cutoff::band_support(j_min - 1).1 >= 1.0 {
        j_min -= 1;
    }
    while cutoff::band_support(j_min).1 < 1.0 {
        j_min += 1;
    }
    let cap = grid.n() as f64 / 3.0;
    let mut j_max = j_min;
    while cutoff::band_support(j_max + 1).0 <= cap {
        j_max += 1;
    }
    (j_min, j_max)
}

/// Multiplies `f` by the band-`j` profile.
pub fn band<T: Scalar>(f: &SpectralField<T>, j: i32) -> SpectralField<T> {
    f.multiply(|k| {
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        Complex::new(T::lit(cutoff::band_weight(j, r)), T::zero())
    })
}

/// All bands of the truncated range, lowest first.
pub fn decompose<T: Scalar>(f: &SpectralField<T>) -> Vec<DyadicBand<T>> {
    let (j_min, j_max) = band_range(f.grid());
    (j_min..=j_max).map(|j| DyadicBand { j, field: band(f, j) }).collect()
}

/// Combines per-band L^p norms into `(∑ 2^{jsr} a_j^r)^{1/r}` or
/// `sup_j 2^{js} a_j`.
fn combine(band_norms: impl Iterator<Item = (i32, f64)>, params: BesovParams) -> f64 {
    if params.r.is_infinite() {
        band_norms
            .map(|(j, a)| 2f64.powf(j as f64 * params.s) * a)
            .fold(0.0, f64::max)
    } else {
        let sum: f64 = band_norms
            .map(|(j, a)| (2f64.powf(j as f64 * params.s) * a).powf(params.r))
            .sum();
        sum.powf(1.0 / params.r)
    }
}

/// `‖f‖_{Ḃ^s_{p,r}}` over the truncated band range.
pub fn besov_norm<T: Scalar>(f: &SpectralField<T>, params: BesovParams) -> Result<T, BesovError> {
    besov_norm_vector(&[f], params)
}

/// Besov norm of a vector-valued field: each band's L^p norm is taken of
/// the pointwise Euclidean magnitude of that band's components.
pub fn besov_norm_vector<T: Scalar>(parts: &[&SpectralField<T>], params: BesovParams) -> Result<T, BesovError> {
    let grid = parts[0].grid();
    for p in parts {
        crate::spectral::same_grid(parts[0], p)?;
    }
    let (j_min, j_max) = band_range(grid);
    let mut norms = Vec::with_capacity((j_max - j_min + 1) as usize);
    for j in j_min..=j_max {
        let bands: Vec<_> = parts.iter().map(|f| band(f, j)).collect();
        let samples = backward_many(&bands.iter().collect::<Vec<_>>());
        let a = if samples.len() == 1 {
            lp_norm(&samples[0], params.p)?
        } else {
            let refs: Vec<_> = samples.iter().collect();
            lp_norm(&pointwise_magnitude(&refs), params.p)?
        };
        norms.push((j, a.as_f64()));
    }
    Ok(T::lit(combine(norms.into_iter(), params)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::random_band_limited;
    use crate::spectral::{backward_transform, forward_transform, RealField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn cos4(g: &Arc<Grid<f64>>) -> SpectralField<f64> {
        forward_transform(&RealField::from_fn(g, |x, _, _| (4.0 * x).cos())).unwrap()
    }

    #[test]
    fn band_range_examples() {
        assert_eq!(band_range(&Grid::<f64>::new(16).unwrap()), (0, 3));
        assert_eq!(band_range(&Grid::<f64>::new(8).unwrap()), (0, 2));
        assert_eq!(band_range(&Grid::<f64>::new(32).unwrap()), (0, 4));
        for n in [8, 16, 32, 64, 128] {
            let (a, b) = band_range(&Grid::<f64>::new(n).unwrap());
            assert!(a <= b);
        }
    }

    #[test]
    fn partition_of_unity_at_retained_wavenumbers() {
        for n in [8, 16, 32, 64] {
            let g = Grid::<f64>::new(n).unwrap();
            let (a, b) = band_range(&g);
            for idx in 0..g.len() {
                if !g.is_retained(idx) || idx == 0 {
                    continue;
                }
                let r = (g.k_squared(idx) as f64).sqrt();
                let total: f64 = (a..=b).map(|j| cutoff::band_weight(j, r)).sum();
                assert!((total - 1.0).abs() <= 1e-12, "n = {n}, |k| = {r}");
            }
        }
    }

    #[test]
    fn single_mode_lands_in_one_band() {
        let g = Grid::<f64>::new(16).unwrap();
        let f = cos4(&g);
        for b in decompose(&f) {
            let x = backward_transform(&b.field).unwrap();
            if b.j == 2 {
                let orig = backward_transform(&f).unwrap();
                assert!((&x - &orig).max_abs() < 1e-14);
            } else {
                assert!(x.max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_has_no_bands() {
        let g = Grid::<f64>::new(8).unwrap();
        let f = forward_transform(&RealField::constant(&g, 2.5)).unwrap();
        assert!(decompose(&f)
            .iter()
            .all(|b| b.field.coeffs().iter().all(|c| c.norm() == 0.0)));
    }

    #[test]
    fn reconstruction_is_mean_free_part() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let f = forward_transform(&random_band_limited(&g, &mut rng)).unwrap();
            let sum = decompose(&f)
                .into_iter()
                .fold(SpectralField::zeros(&g), |acc, b| &acc + &b.field);
            let a = backward_transform(&sum).unwrap();
            let b = backward_transform(&f.without_mean()).unwrap();
            assert!((&a - &b).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn non_adjacent_bands_are_disjoint() {
        let g = Grid::<f64>::new(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = forward_transform(&random_band_limited(&g, &mut rng)).unwrap();
        let bands = decompose(&f);
        for a in &bands {
            for b in &bands {
                if (a.j - b.j).abs() >= 2 {
                    let overlap = a
                        .field
                        .coeffs()
                        .iter()
                        .zip(b.field.coeffs())
                        .any(|(x, y)| x.norm() != 0.0 && y.norm() != 0.0);
                    assert!(!overlap, "bands {} and {} overlap", a.j, b.j);
                }
            }
        }
    }

    #[test]
    fn besov_examples() {
        let g = Grid::<f64>::new(16).unwrap();
        let f = cos4(&g);
        let n0 = besov_norm(&f, BesovParams::new(0.0, f64::INFINITY, f64::INFINITY).unwrap()).unwrap();
        assert!((n0 - 1.0).abs() < 1e-14);
        let n1 = besov_norm(&f, BesovParams::new(1.0, f64::INFINITY, f64::INFINITY).unwrap()).unwrap();
        assert!((n1 - 4.0).abs() < 1e-13);
        let z = SpectralField::zeros(&g);
        for (s, p, r) in [(0.0, 2.0, 2.0), (1.5, 1.0, 3.0), (-1.0, f64::INFINITY, 1.0)] {
            assert_eq!(besov_norm(&z, BesovParams::new(s, p, r).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn b022_is_l2_of_mean_free_part() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let params = BesovParams::new(0.0, 2.0, 2.0).unwrap();
        // Single-band fields: the squared band profile is one on their support.
        for m in [1.0, 2.0, 4.0] {
            let f = forward_transform(&RealField::from_fn(&g, |x, y, _| (m * x).sin() + (m * y).cos())).unwrap();
            let l2 = crate::spectral::sobolev_norm(&f.without_mean(), 0.0).unwrap();
            let b = besov_norm(&f, params).unwrap();
            assert!(((b - l2) / l2).abs() < 1e-10);
        }
        // Random fields: bands overlap, so only the two-sided equivalence holds.
        for _ in 0..10 {
            let f = forward_transform(&random_band_limited(&g, &mut rng)).unwrap();
            let l2 = crate::spectral::sobolev_norm(&f.without_mean(), 0.0).unwrap();
            let b = besov_norm(&f, params).unwrap();
            assert!(b <= l2 * (1.0 + 1e-12) && b >= l2 / 2f64.sqrt() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sup_over_bands_is_below_sum() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let f = forward_transform(&random_band_limited(&g, &mut rng)).unwrap();
            for (s, p) in [(0.0, 2.0), (0.5, f64::INFINITY), (-0.5, 3.0)] {
                let sup = besov_norm(&f, BesovParams::new(s, p, f64::INFINITY).unwrap()).unwrap();
                for r in [1.0, 2.0, 4.0] {
                    let sum = besov_norm(&f, BesovParams::new(s, p, r).unwrap()).unwrap();
                    assert!(sup <= sum * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(BesovParams::new(0.0, 0.5, 1.0).is_err());
        assert!(BesovParams::new(0.0, 1.0, 0.0).is_err());
        assert!(BesovParams::new(f64::NAN, 1.0, 1.0).is_err());
    }
}
