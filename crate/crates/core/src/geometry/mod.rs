//! Vectors, hyperplanes, caps of the unit ball and orthonormal frames.

pub mod linalg;
mod vector;

pub use vector::{Vector, MAX_DIM};

use crate::error::{Error, Result};

/// Deviation from unit norm accepted (and then renormalized away) on input.
pub const UNIT_INPUT_TOL: f64 = 1e-9;
/// Unit-norm invariant held by stored directions and normals.
pub const UNIT_TOL: f64 = 1e-12;
/// Orthonormality invariant of a [`Frame`].
pub const FRAME_TOL: f64 = 1e-10;

fn unit_direction(x: &Vector, what: &str) -> Result<Vector> {
    let n = x.norm();
    if !x.is_finite() || (n - 1.0).abs() > UNIT_INPUT_TOL {
        return Err(Error::InvalidInput(format!(
            "{what} must be a unit vector, norm is {n}"
        )));
    }
    Ok(*x * (1.0 / n))
}

/// The hyperplane `{y : <y, normal> = offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane {
    pub normal: Vector,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let n = normal
            .normalized()
            .ok_or_else(|| Error::InvalidInput("zero hyperplane normal".into()))?;
        let scale = normal.norm();
        Ok(Hyperplane {
            normal: n,
            offset: offset / scale,
        })
    }

    #[inline]
    pub fn signed_distance(&self, y: &Vector) -> f64 {
        y.dot(&self.normal) - self.offset
    }
}

/// The smaller cap `C(x, t) = {y in B^d : <y, x> >= 1 - t}` of the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    direction: Vector,
    height: f64,
}

impl Cap {
    pub fn new(direction: Vector, height: f64) -> Result<Self> {
        if !(height > 0.0 && height < 1.0) {
            return Err(Error::InvalidInput(format!(
                "cap height must lie in (0, 1), got {height}"
            )));
        }
        Ok(Cap {
            direction: unit_direction(&direction, "cap direction")?,
            height,
        })
    }

    pub fn direction(&self) -> Vector {
        self.direction
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn hyperplane(&self) -> Hyperplane {
        Hyperplane {
            normal: self.direction,
            offset: 1.0 - self.height,
        }
    }

    /// Centre `(1 - t) x` of the base disk.
    pub fn base_center(&self) -> Vector {
        self.direction * (1.0 - self.height)
    }

    /// Radius `sqrt(t (2 - t))` of the base disk.
    pub fn base_radius(&self) -> f64 {
        (self.height * (2.0 - self.height)).sqrt()
    }

    /// Angular radius of the spherical part, `arccos(1 - t)`.
    pub fn angular_radius(&self) -> f64 {
        (1.0 - self.height).acos()
    }

    pub fn contains(&self, y: &Vector) -> bool {
        y.norm_sq() <= 1.0 && y.dot(&self.direction) >= 1.0 - self.height
    }
}

/// A cap together with its cutting hyperplane and base disk.
#[derive(Debug, Clone, Copy)]
pub struct CapSection {
    pub cap: Cap,
    pub hyperplane: Hyperplane,
    pub base_center: Vector,
    pub base_radius: f64,
}

/// Cap of the unit ball with centre `x` and height `t`, its hyperplane
/// `<z, x> = 1 - t` and its base disk.
pub fn cap_from_direction(x: &Vector, t: f64) -> Result<CapSection> {
    let cap = Cap::new(*x, t)?;
    Ok(CapSection {
        cap,
        hyperplane: cap.hyperplane(),
        base_center: cap.base_center(),
        base_radius: cap.base_radius(),
    })
}

/// Orthonormal basis of an `s`-dimensional linear subspace of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    dim: usize,
    basis: Vec<Vector>,
}

impl Frame {
    /// Orthonormalizes `vectors` (Gram–Schmidt with re-orthogonalization).
    pub fn from_vectors(vectors: &[Vector]) -> Result<Self> {
        let dim = vectors
            .first()
            .ok_or_else(|| Error::InvalidInput("empty frame".into()))?
            .dim();
        if vectors.iter().any(|v| v.dim() != dim) || vectors.len() > dim {
            return Err(Error::InvalidInput(
                "frame vectors must share a dimension and number at most d".into(),
            ));
        }
        let basis = linalg::orthonormalize(vectors, 1e-8).ok_or_else(|| {
            Error::DegenerateInput("frame vectors are linearly dependent".into())
        })?;
        Ok(Frame { dim, basis })
    }

    /// Span of the first `s` coordinate axes.
    pub fn standard(dim: usize, s: usize) -> Self {
        assert!(s >= 1 && s <= dim);
        Frame {
            dim,
            basis: (0..s).map(|i| Vector::unit(dim, i)).collect(),
        }
    }

    pub(crate) fn from_orthonormal(dim: usize, basis: Vec<Vector>) -> Self {
        Frame { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Coordinates of `p` in the frame (an `s`-dimensional vector).
    #[inline]
    pub fn coordinates(&self, p: &Vector) -> Vector {
        Vector::from_fn(self.basis.len(), |j| p.dot(&self.basis[j]))
    }

    /// Orthogonal projection of `p` onto the subspace, in ambient coordinates.
    pub fn project_ambient(&self, p: &Vector) -> Vector {
        self.basis
            .iter()
            .fold(Vector::zeros(self.dim), |acc, b| acc.axpy(p.dot(b), b))
    }

    pub fn max_orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, u) in self.basis.iter().enumerate() {
            for (j, v) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((u.dot(v) - target).abs());
            }
        }
        worst
    }

    /// Applies the linear map `rotate` to every basis vector.
    pub fn rotated(&self, rotate: impl Fn(&Vector) -> Vector) -> Result<Frame> {
        let moved: Vec<Vector> = self.basis.iter().map(rotate).collect();
        Frame::from_vectors(&moved)
    }
}

/// Minimum angle between the unit vector `z` and the unit vectors of the
/// subspace spanned by `frame`, in `[0, pi/2]`.
///
/// Equals `arccos(|z|A|)`; evaluated as `atan2(|z - z|A|, |z|A|)`, which stays
/// accurate for small angles.
pub fn angle_to_subspace(z: &Vector, frame: &Frame) -> f64 {
    let proj = frame.project_ambient(z);
    let residual = *z - proj;
    residual.norm().atan2(proj.norm())
}

/// Orthogonal projection of every point onto the frame, in frame coordinates.
pub fn project_points(points: &[Vector], frame: &Frame) -> Vec<Vector> {
    points.iter().map(|p| frame.coordinates(p)).collect()
}
