use super::{RealField, SpectralError, SpectralField};
use crate::scalar::Scalar;

/// `(∑|f|^p (2π/n)³)^{1/p}` by uniform quadrature; `p = ∞` gives the grid
/// maximum of `|f|`.
pub fn lp_norm<T: Scalar>(f: &RealField<T>, p: f64) -> Result<T, SpectralError> {
    if p.is_nan() || p < 1.0 {
        return Err(SpectralError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let dv = f.grid().cell_volume();
    if p == 2.0 {
        let s = f.samples().iter().fold(T::zero(), |a, &x| a + x * x);
        return Ok((s * dv).sqrt());
    }
    let pt = T::lit(p);
    // Scale by the maximum so large p does not overflow.
    let m = f.max_abs();
    if m == T::zero() {
        return Ok(T::zero());
    }
    let s = f.samples().iter().fold(T::zero(), |a, &x| a + (x.abs() / m).powf(pt));
    Ok(m * (s * dv).powf(T::one() / pt))
}

/// Inhomogeneous Sobolev norm `((2π)³ ∑(1+|k|²)^s |F(k)|²)^{1/2}`; `s = 0`
/// coincides with the L² norm.
pub fn sobolev_norm<T: Scalar>(f: &SpectralField<T>, s: f64) -> Result<T, SpectralError> {
    if s.is_nan() || s < 0.0 {
        return Err(SpectralError::InvalidRegularity(s));
    }
    let st = T::lit(s);
    let sum = f.weighted_energy(|k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        T::lit(1.0 + k2).powf(st)
    });
    Ok((f.grid().volume() * sum).sqrt())
}

/// `‖∇f‖²_{L²} = (2π)³ ∑|k|²|F(k)|²`.
pub fn gradient_norm_sq<T: Scalar>(f: &SpectralField<T>) -> T {
    let sum = f.weighted_energy(|k| T::lit((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64));
    f.grid().volume() * sum
}

/// `‖f‖²_{L²} = (2π)³ ∑|F(k)|²`.
pub fn l2_norm_sq<T: Scalar>(f: &SpectralField<T>) -> T {
    f.grid().volume() * f.weighted_energy(|_| T::one())
}

/// Share of the mean-free spectral energy carried by modes whose largest
/// axis wavenumber exceeds two thirds of the dealiasing cutoff. Reported
/// next to grid maxima, which under-sample marginally resolved fields.
pub fn spectral_tail_fraction<T: Scalar>(f: &SpectralField<T>) -> T {
    let cutoff = f.grid().dealias_cutoff();
    let edge = (2 * cutoff) as f64 / 3.0;
    let total = f.weighted_energy(|k| if k == [0, 0, 0] { T::zero() } else { T::one() });
    if total == T::zero() {
        return T::zero();
    }
    let tail = f.weighted_energy(|k| {
        let m = k.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
        if m > edge {
            T::one()
        } else {
            T::zero()
        }
    });
    tail / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::random_band_limited;
    use crate::spectral::{forward_transform, Grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cosine_norms() {
        let g = Grid::<f64>::new(16).unwrap();
        let f = RealField::from_fn(&g, |x, _, _| (4.0 * x).cos());
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let pi3 = std::f64::consts::PI.powi(3);
        let l2 = lp_norm(&f, 2.0).unwrap();
        assert!((l2 - (4.0 * pi3).sqrt()).abs() < 1e-12 * l2);
        // Generic path agrees with the p = 2 shortcut.
        let l2_generic = lp_norm(&f, 2.0 + 1e-15).unwrap();
        assert!((l2_generic - l2).abs() < 1e-10);
    }

    #[test]
    fn zero_field_norms() {
        let g = Grid::<f64>::new(8).unwrap();
        let f = RealField::zeros(&g);
        for p in [1.0, 2.0, 3.0, 7.5, f64::INFINITY] {
            assert_eq!(lp_norm(&f, p).unwrap(), 0.0);
        }
        let s = forward_transform(&f).unwrap();
        assert_eq!(sobolev_norm(&s, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_small_exponent() {
        let g = Grid::<f64>::new(8).unwrap();
        let f = RealField::zeros(&g);
        assert!(matches!(lp_norm(&f, 0.5), Err(SpectralError::InvalidExponent(_))));
        assert!(matches!(lp_norm(&f, f64::NAN), Err(SpectralError::InvalidExponent(_))));
        let s = forward_transform(&f).unwrap();
        assert!(sobolev_norm(&s, -1.0).is_err());
    }

    #[test]
    fn sobolev_zero_matches_l2() {
        let g = Grid::<f64>::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let f = random_band_limited(&g, &mut rng);
            let s = forward_transform(&f).unwrap();
            let a = sobolev_norm(&s, 0.0).unwrap();
            let b = lp_norm(&f, 2.0).unwrap();
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_single_mode() {
        let g = Grid::<f64>::new(16).unwrap();
        let f = forward_transform(&RealField::from_fn(&g, |_, y, _| (2.0 * y).cos())).unwrap();
        // (1 + 4)^{3/2} weight on an L² norm of (4π³)^{1/2}.
        let expected = (125.0 * 4.0 * std::f64::consts::PI.powi(3)).sqrt();
        let got = sobolev_norm(&f, 3.0).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn tail_fraction_bounds() {
        let g = Grid::<f64>::new(16).unwrap();
        let low = forward_transform(&RealField::from_fn(&g, |x, _, _| x.cos())).unwrap();
        assert!(spectral_tail_fraction(&low) < 1e-30);
        let high = forward_transform(&RealField::from_fn(&g, |x, _, _| (5.0 * x).cos())).unwrap();
        assert!((spectral_tail_fraction(&high) - 1.0).abs() < 1e-14);
    }
}
