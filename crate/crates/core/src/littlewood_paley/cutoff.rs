//! The smooth radial cutoff and the dyadic annulus profile derived from it.

/// Inner radius of the plateau where the cutoff equals one.
pub const PLATEAU_RADIUS: f64 = 1.25;
/// Radius beyond which the cutoff vanishes.
pub const SUPPORT_RADIUS: f64 = 1.5;

fn sigma(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `t <= 0`, 1 for `t >= 1`, monotone in between.
fn smooth_step(t: f64) -> f64 {
    let a = sigma(t);
    let b = sigma(1.0 - t);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Radial cutoff: 1 on `|ξ| <= 5/4`, 0 on `|ξ| >= 3/2`, smooth and
/// nonincreasing in between.
pub fn phi(r: f64) -> f64 {
    smooth_step((SUPPORT_RADIUS - r) / (SUPPORT_RADIUS - PLATEAU_RADIUS))
}

/// Annulus profile `phi(r) − phi(2r)`, supported in `[5/8, 3/2]`.
pub fn varphi(r: f64) -> f64 {
    phi(r) - phi(2.0 * r)
}

/// Band weight `varphi(2^{-j} r)`.
pub fn band_weight(j: i32, r: f64) -> f64 {
    varphi(r * 2f64.powi(-j))
}

/// Closed interval of |ξ| on which band `j` can be nonzero.
pub fn band_support(j: i32) -> (f64, f64) {
    let s = 2f64.powi(j);
    (0.5 * PLATEAU_RADIUS * s, SUPPORT_RADIUS * s)
}
