use crate::error::{Error, Result};
use crate::geometry::{angle_to_subspace, linalg, Frame, Vector};
use crate::intrinsic::projection_volume;
use crate::sampling::{haar_subspace, RngStream};

use super::construction::cap_construction;

/// Rejection efficiency below which the frame sampler gives up.
pub const MIN_REJECTION_EFFICIENCY: f64 = 1e-6;

/// The restricted projection functional
/// `V_s^(z0, F) = int_{L meets Sigma_2} lambda_s([z0, F] | L) nu_s(dL)`
/// evaluated on a fixed set of Haar frames.
///
/// Frames are drawn once; only those with `angle(x, L) <= theta_2` are kept,
/// and the sum over them is divided by the total number drawn, so the result
/// estimates the restricted integral rather than a conditional mean.
#[derive(Debug, Clone)]
pub struct HatVs {
    dim: usize,
    s: usize,
    drawn: usize,
    accepted: Vec<Frame>,
}

impl HatVs {
    pub fn new(x: &Vector, t: f64, s: usize, n_frames: usize, stream: RngStream) -> Result<Self> {
        let d = x.dim();
        if s == 0 || s > d {
            return Err(Error::InvalidInput(format!(
                "intrinsic index must satisfy 1 <= s <= {d}, got {s}"
            )));
        }
        if n_frames == 0 {
            return Err(Error::InvalidInput("need at least one frame".into()));
        }
        let family = cap_construction(x, t)?;
        if s == d {
            return Ok(HatVs {
                dim: d,
                s,
                drawn: 1,
                accepted: Vec::new(),
            });
        }
        let theta2 = family.sigma2_half_angle();
        let mut rng = stream.rng();
        let mut accepted = Vec::new();
        for _ in 0..n_frames {
            let frame = haar_subspace(d, s, &mut rng)?;
            if angle_to_subspace(&family.x, &frame) <= theta2 {
                accepted.push(frame);
            }
        }
        let efficiency = accepted.len() as f64 / n_frames as f64;
        if accepted.is_empty() || efficiency < MIN_REJECTION_EFFICIENCY {
            return Err(Error::TooSmallCone { efficiency });
        }
        Ok(HatVs {
            dim: d,
            s,
            drawn: n_frames,
            accepted,
        })
    }

    /// Fraction of drawn frames that met `Sigma_2`.
    pub fn efficiency(&self) -> f64 {
        if self.s == self.dim {
            1.0
        } else {
            self.accepted.len() as f64 / self.drawn as f64
        }
    }

    pub fn evaluate(&self, z0: &Vector, face: &[Vector]) -> Result<f64> {
        if face.len() != self.dim || z0.dim() != self.dim {
            return Err(Error::InvalidInput(format!(
                "expected a point and {} face points in dimension {}",
                self.dim, self.dim
            )));
        }
        let mut simplex = Vec::with_capacity(self.dim + 1);
        simplex.push(*z0);
        simplex.extend_from_slice(face);
        if self.s == self.dim {
            return Ok(linalg::simplex_volume(&simplex));
        }
        let mut total = 0.0;
        for frame in &self.accepted {
            total += projection_volume(&simplex, frame)?;
        }
        Ok(total / self.drawn as f64)
    }
}

/// One-shot evaluation of the restricted functional with `n_frames` Haar
/// frames from `stream`. Evaluations sharing a stream share their frames.
pub fn hat_vs(
    z0: &Vector,
    face: &[Vector],
    x: &Vector,
    t: f64,
    s: usize,
    n_frames: usize,
    stream: RngStream,
) -> Result<f64> {
    HatVs::new(x, t, s, n_frames, stream)?.evaluate(z0, face)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_is_the_simplex_volume() {
        let x = Vector::unit(2, 0);
        let f = cap_construction(&x, 1e-2).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let z: Vec<Vector> = (0..3).map(|j| f.sample_delta(j, &mut rng)).collect();
        let v = hat_vs(&z[0], &z[1..], &x, 1e-2, 2, 10, RngStream::new(2, 0)).unwrap();
        assert_eq!(v, linalg::simplex_volume(&z));
    }

    #[test]
    fn restricted_integral_is_below_the_kubota_mean() {
        // for s < d the restricted integral is bounded by the unrestricted mean
        let x = Vector::unit(3, 0);
        let t = 1e-2;
        let f = cap_construction(&x, t).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let z: Vec<Vector> = (0..4).map(|j| f.sample_delta(j, &mut rng)).collect();
        let h = HatVs::new(&x, t, 2, 20_000, RngStream::new(4, 0)).unwrap();
        let restricted = h.evaluate(&z[0], &z[1..]).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let mut full = 0.0;
        for _ in 0..20_000 {
            full += projection_volume(&z, &haar_subspace(3, 2, &mut rng).unwrap()).unwrap();
        }
        full /= 20_000.0;
        assert!(restricted > 0.0 && restricted <= full);
        assert!(h.efficiency() > 0.0 && h.efficiency() < 1.0);
    }

    #[test]
    fn monotone_under_inclusion() {
        let x = Vector::unit(2, 0);
        let t = 1e-3;
        let f = cap_construction(&x, t).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let h = HatVs::new(&x, t, 1, 4000, RngStream::new(6, 0)).unwrap();
        let face: Vec<Vector> = (1..=2).map(|j| f.sample_delta(j, &mut rng)).collect();
        for _ in 0..50 {
            let z1 = f.sample_psi(1, &mut rng).unwrap();
            let z2 = f.sample_psi(2, &mut rng).unwrap();
            assert!(h.evaluate(&z1, &face).unwrap() >= h.evaluate(&z2, &face).unwrap());
        }
    }

    #[test]
    fn tiny_acceptance_is_reported() {
        // a handful of frames at a tiny cap almost never meet Sigma_2
        let x = Vector::unit(4, 0);
        let err = HatVs::new(&x, 1e-9, 1, 3, RngStream::new(7, 0)).unwrap_err();
        assert!(matches!(err, Error::TooSmallCone { .. }));
    }
}
