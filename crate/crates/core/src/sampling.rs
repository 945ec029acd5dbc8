//! Reproducible random sampling: points in balls and ellipsoids, on spheres,
//! in simplices, and Haar-random subspaces.
//!
//! Every random quantity is drawn from a [`RngStream`], a ChaCha8 generator
//! keyed by `(seed, stream_id)`. Replications own disjoint stream ids, so
//! their draws do not depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{linalg, Frame, Vector, MAX_DIM};

/// Key of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream id built from hierarchical labels, e.g. `(level, replication)`.
    pub fn keyed(seed: u64, labels: &[u64]) -> Self {
        // FNV-1a over the label words; collisions need identical label tuples.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for l in labels {
            for b in l.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            h ^= 0xff;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        RngStream::new(seed, h)
    }
}

/// The mother body `K` from which points are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodySpec {
    Ball { dim: usize },
    Ellipsoid { semiaxes: Vec<f64> },
}

impl BodySpec {
    pub fn ball(dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(BodySpec::Ball { dim })
    }

    pub fn ellipsoid(semiaxes: &[f64]) -> Result<Self> {
        if semiaxes.is_empty() || semiaxes.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "ellipsoid needs 1..={MAX_DIM} semiaxes, got {}",
                semiaxes.len()
            )));
        }
        if semiaxes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidInput(
                "ellipsoid semiaxes must be positive".into(),
            ));
        }
        Ok(BodySpec::Ellipsoid {
            semiaxes: semiaxes.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Ball { dim } => *dim,
            BodySpec::Ellipsoid { semiaxes } => semiaxes.len(),
        }
    }

    /// Semiaxes; all ones for the ball.
    pub fn semiaxes(&self) -> Vec<f64> {
        match self {
            BodySpec::Ball { dim } => vec![1.0; *dim],
            BodySpec::Ellipsoid { semiaxes } => semiaxes.clone(),
        }
    }

    pub fn is_ball(&self) -> bool {
        match self {
            BodySpec::Ball { .. } => true,
            BodySpec::Ellipsoid { semiaxes } => semiaxes.iter().all(|a| *a == 1.0),
        }
    }

    pub fn volume(&self) -> f64 {
        linalg::ball_volume(self.dim()) * self.semiaxes().iter().product::<f64>()
    }

    /// Global lower and upper bounds on the principal curvatures of the
    /// boundary: `min a_i / (max a_j)^2` and `max a_i / (min a_j)^2`.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        let axes = self.semiaxes();
        let lo = axes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = axes.iter().cloned().fold(0.0f64, f64::max);
        (lo / (hi * hi), hi / (lo * lo))
    }

    pub fn contains(&self, p: &Vector) -> bool {
        let axes = self.semiaxes();
        p.as_slice()
            .iter()
            .zip(&axes)
            .map(|(x, a)| (x / a) * (x / a))
            .sum::<f64>()
            <= 1.0
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BodySpec::Ball { dim } => BodySpec::ball(*dim).map(|_| ()),
            BodySpec::Ellipsoid { semiaxes } => BodySpec::ellipsoid(semiaxes).map(|_| ()),
        }
    }
}

#[inline]
fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_fn(dim, |_| rng.sample(StandardNormal))
}

/// Uniform point on the sphere `S^{d-1}` (normalized Gaussian vector).
pub fn uniform_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    loop {
        if let Some(u) = gaussian_vector(dim, rng).normalized() {
            return u;
        }
    }
}

/// Uniform point in the unit ball `B^d`: uniform direction times `U^{1/d}`.
pub fn uniform_ball<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    let u = uniform_sphere(dim, rng);
    let r: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
    u * r
}

/// Uniform point in the body; ellipsoids are diagonal images of the ball.
pub fn uniform_body<R: Rng + ?Sized>(body: &BodySpec, rng: &mut R) -> Vector {
    match body {
        BodySpec::Ball { dim } => uniform_ball(*dim, rng),
        BodySpec::Ellipsoid { semiaxes } => {
            let mut p = uniform_ball(semiaxes.len(), rng);
            for (i, a) in semiaxes.iter().enumerate() {
                p[i] *= a;
            }
            p
        }
    }
}

/// `n` independent uniform points in the body.
pub fn sample_body<R: Rng + ?Sized>(body: &BodySpec, n: usize, rng: &mut R) -> Vec<Vector> {
    (0..n).map(|_| uniform_body(body, rng)).collect()
}

/// Uniform point in the simplex with the given vertices (Dirichlet(1,...,1)
/// barycentric weights).
pub fn uniform_simplex<R: Rng + ?Sized>(vertices: &[Vector], rng: &mut R) -> Vector {
    let weights: Vec<f64> = vertices.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut p = Vector::zeros(vertices[0].dim());
    for (w, v) in weights.iter().zip(vertices) {
        p = p.axpy(w / total, v);
    }
    p
}

/// Haar-random `s`-dimensional subspace of `R^d`: Gram–Schmidt (with
/// re-orthogonalization) of `s` standard Gaussian vectors, redrawn when the
/// draw is conditioned worse than `1e-8`.
pub fn haar_subspace<R: Rng + ?Sized>(dim: usize, s: usize, rng: &mut R) -> Result<Frame> {
    if s == 0 || s > dim || dim > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "subspace rank must satisfy 1 <= s <= d <= {MAX_DIM}, got s={s}, d={dim}"
        )));
    }
    loop {
        let draws: Vec<Vector> = (0..s).map(|_| gaussian_vector(dim, rng)).collect();
        if let Some(basis) = linalg::orthonormalize(&draws, 1e-8) {
            return Ok(Frame::from_orthonormal(dim, basis));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::angle_to_subspace;
    use approx::assert_relative_eq;

    #[test]
    fn streams_are_deterministic() {
        let s = RngStream::new(7, 3);
        let a: Vec<Vector> = (0..5).map(|_| ()).scan(s.rng(), |r, _| Some(uniform_ball(3, r))).collect();
        let b: Vec<Vector> = (0..5).map(|_| ()).scan(s.rng(), |r, _| Some(uniform_ball(3, r))).collect();
        assert_eq!(a, b);
        let mut other = RngStream::new(7, 4).rng();
        assert_ne!(a[0], uniform_ball(3, &mut other));
    }

    #[test]
    fn ball_spec_delegates_to_uniform_ball() {
        let s = RngStream::new(1, 1);
        let mut r1 = s.rng();
        let mut r2 = s.rng();
        for _ in 0..10 {
            assert_eq!(
                uniform_body(&BodySpec::Ball { dim: 4 }, &mut r1),
                uniform_ball(4, &mut r2)
            );
        }
    }

    #[test]
    fn ellipsoid_validation() {
        assert!(BodySpec::ellipsoid(&[1.0, -1.0]).is_err());
        assert!(BodySpec::ellipsoid(&[]).is_err());
        let e = BodySpec::ellipsoid(&[2.0, 1.0]).unwrap();
        assert_relative_eq!(e.volume(), 2.0 * std::f64::consts::PI);
        let (lo, hi) = e.curvature_bounds();
        assert_relative_eq!(lo, 0.25);
        assert_relative_eq!(hi, 2.0);
    }

    #[test]
    fn haar_frames_are_orthonormal() {
        let mut rng = RngStream::new(11, 0).rng();
        for s in 1..=5 {
            let f = haar_subspace(5, s, &mut rng).unwrap();
            assert_eq!(f.rank(), s);
            assert!(f.max_orthonormality_error() < 1e-10);
        }
        assert!(haar_subspace(3, 4, &mut rng).is_err());
        assert!(haar_subspace(3, 0, &mut rng).is_err());
    }

    #[test]
    fn full_rank_frame_contains_everything() {
        let mut rng = RngStream::new(2, 9).rng();
        let f = haar_subspace(4, 4, &mut rng).unwrap();
        for _ in 0..20 {
            let z = uniform_sphere(4, &mut rng);
            assert!(angle_to_subspace(&z, &f) < 1e-7);
        }
    }

    #[test]
    fn simplex_points_have_positive_barycentrics() {
        let verts = [
            Vector::new(&[0.0, 0.0]),
            Vector::new(&[1.0, 0.0]),
            Vector::new(&[0.0, 1.0]),
        ];
        let mut rng = RngStream::new(5, 5).rng();
        for _ in 0..1000 {
            let p = uniform_simplex(&verts, &mut rng);
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-15);
        }
    }
}
