//! Intrinsic volumes `V_s` of polytopes.
//!
//! Three independent evaluators:
//!
//! * [`kubota_intrinsic`]: mean `s`-volume of projections onto Haar-random
//!   `s`-subspaces, times `c(d,s) = binom(d,s) kappa_d / (kappa_s kappa_{d-s})`;
//! * [`exact_intrinsic`]: sum over `s`-faces of face volume times normalized
//!   external angle;
//! * [`steiner_fit_oracle`]: least-squares fit of the polynomial
//!   `lambda -> vol(P + lambda B^d)` estimated by hit-or-miss sampling.

pub mod distance;
mod external;
mod steiner;

pub use external::{exact_intrinsic, external_angle, face_volume};
pub use steiner::{steiner_fit_oracle, ConvexSet, PointSet, SteinerFit};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{linalg, project_points, Frame, Vector};
use crate::hull::convex_hull;
use crate::sampling::haar_subspace;

/// Frames redrawn at most this many times when a projection is degenerate.
const MAX_FRAME_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Kubota,
    ExternalAngle,
    SteinerFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntrinsicEstimate {
    pub s: usize,
    pub value: f64,
    /// Monte Carlo standard error; zero for exact evaluations.
    pub std_error: f64,
    pub method: Method,
}

/// Kubota normalization `c(d,s)`.
pub fn kubota_constant(d: usize, s: usize) -> f64 {
    linalg::binomial(d, s) * linalg::ball_volume(d)
        / (linalg::ball_volume(s) * linalg::ball_volume(d - s))
}

/// `V_s(B^d) = binom(d,s) kappa_d / kappa_{d-s}`.
pub fn ball_intrinsic(d: usize, s: usize) -> f64 {
    linalg::binomial(d, s) * linalg::ball_volume(d) / linalg::ball_volume(d - s)
}

/// `lambda_s(conv(points) | L)` for the subspace spanned by `frame`.
///
/// Returns [`Error::DegenerateInput`] when the projection is flat.
pub fn projection_volume(points: &[Vector], frame: &Frame) -> Result<f64> {
    let s = frame.rank();
    if s == 1 {
        let u = frame.basis()[0];
        let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let t = p.dot(&u);
            (lo.min(t), hi.max(t))
        });
        return Ok(hi - lo);
    }
    let projected = project_points(points, frame);
    if projected.len() == s + 1 {
        return Ok(linalg::simplex_volume(&projected));
    }
    Ok(convex_hull(&projected, s)?.volume())
}

fn check_rank(d: usize, s: usize) -> Result<()> {
    if s == 0 || s > d {
        return Err(Error::InvalidInput(format!(
            "intrinsic index must satisfy 1 <= s <= {d}, got {s}"
        )));
    }
    Ok(())
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Kubota estimate of `V_s(conv(points))` from `n_dirs` Haar frames.
///
/// For `s = d` the only subspace is `R^d` and the volume is returned exactly.
pub fn kubota_intrinsic<R: Rng + ?Sized>(
    points: &[Vector],
    s: usize,
    n_dirs: usize,
    rng: &mut R,
) -> Result<IntrinsicEstimate> {
    let d = points
        .first()
        .ok_or_else(|| Error::InvalidInput("empty point set".into()))?
        .dim();
    check_rank(d, s)?;
    if n_dirs == 0 {
        return Err(Error::InvalidInput("need at least one direction".into()));
    }
    if s == d {
        return Ok(IntrinsicEstimate {
            s,
            value: convex_hull(points, d)?.volume(),
            std_error: 0.0,
            method: Method::Kubota,
        });
    }
    let mut samples = Vec::with_capacity(n_dirs);
    for _ in 0..n_dirs {
        let mut attempt = 0;
        loop {
            let frame = haar_subspace(d, s, rng)?;
            match projection_volume(points, &frame) {
                Ok(v) => {
                    samples.push(v);
                    break;
                }
                Err(Error::DegenerateInput(msg)) => {
                    attempt += 1;
                    if attempt >= MAX_FRAME_RETRIES {
                        return Err(Error::DegenerateInput(format!(
                            "projection stayed flat after {attempt} frames: {msg}"
                        )));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(kubota_from_samples(d, s, &samples))
}

/// Kubota estimate using a fixed, caller-supplied set of frames.
pub fn kubota_with_frames(points: &[Vector], frames: &[Frame]) -> Result<IntrinsicEstimate> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidInput("no frames".into()))?;
    let (d, s) = (first.dim(), first.rank());
    check_rank(d, s)?;
    if s == d {
        return Ok(IntrinsicEstimate {
            s,
            value: convex_hull(points, d)?.volume(),
            std_error: 0.0,
            method: Method::Kubota,
        });
    }
    let samples = frames
        .iter()
        .map(|f| projection_volume(points, f))
        .collect::<Result<Vec<f64>>>()?;
    Ok(kubota_from_samples(d, s, &samples))
}

fn kubota_from_samples(d: usize, s: usize, samples: &[f64]) -> IntrinsicEstimate {
    let c = kubota_constant(d, s);
    let (mean, se) = mean_and_stderr(samples);
    IntrinsicEstimate {
        s,
        value: c * mean,
        std_error: c * se,
        method: Method::Kubota,
    }
}

/// `V_s` of the ellipsoid with the given semiaxes by Kubota averaging with
/// exact projected volumes: the projection onto a frame `U` is an
/// `s`-ellipsoid of volume `kappa_s sqrt(det(U^T A^2 U))`.
pub fn ellipsoid_intrinsic<R: Rng + ?Sized>(
    semiaxes: &[f64],
    s: usize,
    n_dirs: usize,
    rng: &mut R,
) -> Result<IntrinsicEstimate> {
    let d = semiaxes.len();
    check_rank(d, s)?;
    if s == d {
        return Ok(IntrinsicEstimate {
            s,
            value: linalg::ball_volume(d) * semiaxes.iter().product::<f64>(),
            std_error: 0.0,
            method: Method::Kubota,
        });
    }
    let kappa_s = linalg::ball_volume(s);
    let mut samples = Vec::with_capacity(n_dirs);
    for _ in 0..n_dirs.max(2) {
        let frame = haar_subspace(d, s, rng)?;
        let scaled: Vec<Vector> = frame
            .basis()
            .iter()
            .map(|b| Vector::from_fn(d, |i| b[i] * semiaxes[i]))
            .collect();
        let gram: Vec<Vector> = (0..s)
            .map(|i| Vector::from_fn(s, |j| scaled[i].dot(&scaled[j])))
            .collect();
        samples.push(kappa_s * linalg::determinant(&gram).max(0.0).sqrt());
    }
    Ok(kubota_from_samples(d, s, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn kubota_constants() {
        assert_relative_eq!(kubota_constant(2, 1), PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(kubota_constant(3, 3), 1.0, epsilon = 1e-15);
        // d=3, s=1: 3 * (4pi/3) / (2 * pi) = 2
        assert_relative_eq!(kubota_constant(3, 1), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn ball_reference_values() {
        assert_relative_eq!(ball_intrinsic(3, 1), 4.0, epsilon = 1e-14);
        assert_relative_eq!(ball_intrinsic(3, 2), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(ball_intrinsic(2, 1), PI, epsilon = 1e-14);
        assert_relative_eq!(ball_intrinsic(2, 2), PI, epsilon = 1e-14);
    }

    #[test]
    fn kubota_full_rank_is_volume() {
        let cube: Vec<Vector> = (0..8)
            .map(|m| Vector::from_fn(3, |i| ((m >> i) & 1) as f64))
            .collect();
        let mut rng = RngStream::new(1, 0).rng();
        let est = kubota_intrinsic(&cube, 3, 5, &mut rng).unwrap();
        assert_eq!(est.value, convex_hull(&cube, 3).unwrap().volume());
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn kubota_square_semiperimeter() {
        let square: Vec<Vector> = (0..4)
            .map(|m| Vector::from_fn(2, |i| ((m >> i) & 1) as f64))
            .collect();
        let mut rng = RngStream::new(2, 0).rng();
        let est = kubota_intrinsic(&square, 1, 10_000, &mut rng).unwrap();
        assert!((est.value - 2.0).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn kubota_segment_length() {
        let seg = [Vector::new(&[0.0, 0.0, 0.0]), Vector::new(&[0.6, 0.8, 0.0]) * 1.5];
        let mut rng = RngStream::new(3, 0).rng();
        let est = kubota_intrinsic(&seg, 1, 20_000, &mut rng).unwrap();
        assert!((est.value - 1.5).abs() <= 4.0 * est.std_error, "{est:?}");
        // a segment has no area in any plane
        assert!(kubota_intrinsic(&seg, 2, 3, &mut rng).is_err());
    }

    #[test]
    fn ellipsoid_reference_reduces_to_ball() {
        let mut rng = RngStream::new(4, 0).rng();
        let est = ellipsoid_intrinsic(&[1.0, 1.0, 1.0], 2, 100, &mut rng).unwrap();
        assert_relative_eq!(est.value, 2.0 * PI, epsilon = 1e-12);
        let est = ellipsoid_intrinsic(&[1.5, 1.0, 0.75], 3, 1, &mut rng).unwrap();
        assert_relative_eq!(est.value, 4.0 / 3.0 * PI * 1.125, epsilon = 1e-14);
    }

    #[test]
    fn ellipse_perimeter_from_kubota() {
        // V_1 of an ellipse is half its perimeter; perimeter of (2,1) ~ 9.688448220547675
        let mut rng = RngStream::new(5, 0).rng();
        let est = ellipsoid_intrinsic(&[2.0, 1.0], 1, 200_000, &mut rng).unwrap();
        assert!((est.value - 9.688448220547675 / 2.0).abs() < 4.0 * est.std_error, "{est:?}");
    }
}
