//! Caps of the unit ball: cap volumes, the wet part and floating body, the
//! simplex-and-cone construction inside a small cap, the restricted
//! projection functional `hat_vs`, and a constructive economic cap covering.

mod construction;
mod cover;
mod hatvs;

pub use construction::{cap_construction, capind_gamma, NormalConeWindow, SimplexFamily, CAP_T_THRESHOLD};
pub use cover::{economic_cover, CapCover, CoverAudit, COVER_BETA, COVER_SEPARATION};
pub use hatvs::{hat_vs, HatVs, MIN_REJECTION_EFFICIENCY};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::linalg::ball_volume;

/// Integrates a smooth function on `[a, b]` by adaptive Simpson quadrature
/// to relative tolerance `rel_tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // a rough magnitude first, so the tolerance is relative
    let rough = step(f, a, b, fa, fm, fb, coarse, 1e-6 * coarse.abs().max(f64::MIN_POSITIVE), 12);
    let tol = rel_tol * rough.abs().max(f64::MIN_POSITIVE);
    step(f, a, b, fa, fm, fb, coarse, tol, 48)
}

/// Volume of the height-`t` cap of `B^d`, `0 <= t <= 2`:
/// `kappa_{d-1} int_{1-t}^1 (1-u^2)^{(d-1)/2} du`, evaluated in the angle
/// variable `u = cos(theta)` where the integrand `sin^d` is smooth.
pub fn cap_volume(d: usize, t: f64) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let t = t.clamp(0.0, 2.0);
    if t == 0.0 {
        return 0.0;
    }
    if d == 1 {
        return t;
    }
    let theta = (1.0 - t).acos();
    let integrand = |th: f64| th.sin().powi(d as i32);
    ball_volume(d - 1) * adaptive_simpson(&integrand, 0.0, theta, 1e-12)
}

/// Profile of the wet part `K(t)` of the ball for cap-volume parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WetPartProfile {
    pub t: f64,
    /// Height `h` of the cap with volume `t`.
    pub cap_height: f64,
    /// Radius `1 - h` of the floating body.
    pub floating_radius: f64,
    /// `kappa_d (1 - r^d)`.
    pub wet_volume: f64,
}

/// Height `h` with `cap_volume(d, h) = v`, by bisection.
pub fn cap_height_for_volume(d: usize, v: f64) -> Result<f64> {
    let half = 0.5 * ball_volume(d);
    if !(v > 0.0 && v <= half * (1.0 + 1e-15)) {
        return Err(Error::OutOfRange { value: v, max: half });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cap_volume(d, mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Wet part of `B^d` with parameter `t` (an absolute cap volume).
pub fn wet_part(d: usize, t: f64) -> Result<WetPartProfile> {
    let h = cap_height_for_volume(d, t)?;
    let r = 1.0 - h;
    // kappa_d (1 - (1-h)^d), accurate for small h
    let wet = -ball_volume(d) * (d as f64 * (-h).ln_1p()).exp_m1();
    Ok(WetPartProfile {
        t,
        cap_height: h,
        floating_radius: r,
        wet_volume: wet,
    })
}

/// `v(x)`: volume of the smallest cap containing `x`, i.e. the cap cut by
/// the hyperplane through `x` orthogonal to `x`.
pub fn v_function(x: &crate::geometry::Vector) -> f64 {
    cap_volume(x.dim(), 1.0 - x.norm())
}
