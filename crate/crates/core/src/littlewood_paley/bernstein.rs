//! Empirical constants of the Bernstein inequalities for band-limited fields.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{band_range, cutoff, BesovError};
use crate::scalar::Scalar;
use crate::spectral::{backward_unchecked, lp_norm, Grid, SpectralField};

/// Measured ratios over a batch of random band-`j` fields.
///
/// `upper` is `sup_{|α|=k} ‖∂^α f‖_q / (2^{jk + 3j(1/p − 1/q)} ‖f‖_p)`;
/// `lower` is `sup_{|α|=k} ‖∂^α f‖_p / (2^{jk} ‖f‖_p)`, the quantity that the
/// two-sided inequality bounds above and below.
#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinReport {
    pub j: i32,
    pub order: u32,
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub upper_min: f64,
    pub upper_max: f64,
    pub lower_min: f64,
    pub lower_max: f64,
}

fn multi_indices(order: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=order {
        for b in 0..=order - a {
            out.push([a, b, order - a - b]);
        }
    }
    out
}

fn derivative<T: Scalar>(f: &SpectralField<T>, alpha: [u32; 3]) -> SpectralField<T> {
    if alpha == [0, 0, 0] {
        return f.clone();
    }
    f.multiply(|k| {
        let mut m = Complex::new(T::one(), T::zero());
        for axis in 0..3 {
            let ik = Complex::new(T::zero(), T::lit(k[axis] as f64));
            for _ in 0..alpha[axis] {
                m = m * ik;
            }
        }
        m
    })
}

/// Band-`j` trial field: the band profile applied to a few point sources
/// with Gaussian weights at uniformly random positions. Such fields are
/// concentrated at scale `2^{-j}`, the regime in which the inequalities
/// are sharp.
fn trial_field<T: Scalar, R: Rng + ?Sized>(grid: &Arc<Grid<T>>, j: i32, rng: &mut R) -> SpectralField<T> {
    let sources = rng.random_range(1..=3);
    let spots: Vec<(f64, [f64; 3])> = (0..sources)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            let x = [0; 3].map(|_: i32| rng.random::<f64>() * std::f64::consts::TAU);
            (w, x)
        })
        .collect();
    SpectralField::from_modes(grid, |k| {
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let weight = cutoff::band_weight(j, r);
        if weight == 0.0 {
            return Complex::new(T::zero(), T::zero());
        }
        let mut c = Complex::new(0.0, 0.0);
        for (w, x) in &spots {
            let phase = -(k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
            c += Complex::from_polar(*w, phase);
        }
        Complex::new(T::lit(weight * c.re), T::lit(weight * c.im))
    })
}

/// Measures Bernstein ratios for `trials` random fields in band `j` with
/// derivative order `order` and exponents `1 <= p <= q <= ∞`.
pub fn bernstein_check<T: Scalar, R: Rng + ?Sized>(
    grid: &Arc<Grid<T>>,
    j: i32,
    order: u32,
    p: f64,
    q: f64,
    trials: usize,
    rng: &mut R,
) -> Result<BernsteinReport, BesovError> {
    let (j_min, j_max) = band_range(grid);
    if j < j_min || j > j_max {
        return Err(BesovError::BandNotRepresentable { j, j_min, j_max });
    }
    if !(p >= 1.0 && q >= p) {
        return Err(BesovError::ExponentOrder { p, q });
    }
    if order > 8 {
        return Err(BesovError::DerivativeOrder(order));
    }
    let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let two_j = 2f64.powi(j);
    let upper_scale = two_j.powf(order as f64 + 3.0 * (inv(p) - inv(q)));
    let lower_scale = two_j.powi(order as i32);
    let alphas = multi_indices(order);

    let mut report = BernsteinReport {
        j,
        order,
        p,
        q,
        trials: 0,
        upper_min: f64::INFINITY,
        upper_max: 0.0,
        lower_min: f64::INFINITY,
        lower_max: 0.0,
    };
    while report.trials < trials {
        let f = trial_field(grid, j, rng);
        let base = lp_norm(&backward_unchecked(&f), p)?.as_f64();
        if base == 0.0 {
            continue;
        }
        let mut up = 0.0f64;
        let mut low = 0.0f64;
        for &alpha in &alphas {
            let d = backward_unchecked(&derivative(&f, alpha));
            up = up.max(lp_norm(&d, q)?.as_f64());
            low = low.max(lp_norm(&d, p)?.as_f64());
        }
        let up = up / (upper_scale * base);
        let low = low / (lower_scale * base);
        report.upper_min = report.upper_min.min(up);
        report.upper_max = report.upper_max.max(up);
        report.lower_min = report.lower_min.min(low);
        report.lower_max = report.lower_max.max(low);
        report.trials += 1;
    }
    Ok(report)
}
