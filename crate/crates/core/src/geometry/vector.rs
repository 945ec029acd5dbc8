use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest ambient dimension supported by the stack-allocated [`Vector`].
pub const MAX_DIM: usize = 8;

/// A point of `R^d` with `1 <= d <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    dim: u8,
    coords: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "dimension {dim} outside 1..={MAX_DIM}"
        );
        Vector {
            dim: dim as u8,
            coords: [0.0; MAX_DIM],
        }
    }

    /// Builds a vector from its coordinates.
    ///
    /// Panics if `coords` is empty or longer than [`MAX_DIM`]; use
    /// [`Vector::try_from_slice`] for untrusted input.
    pub fn new(coords: &[f64]) -> Self {
        let mut v = Vector::zeros(coords.len());
        v.coords[..coords.len()].copy_from_slice(coords);
        v
    }

    pub fn try_from_slice(coords: &[f64]) -> Option<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM || coords.iter().any(|c| !c.is_finite()) {
            return None;
        }
        Some(Vector::new(coords))
    }

    /// The `i`-th standard basis vector of `R^dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.coords[i] = 1.0;
        v
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut v = Vector::zeros(dim);
        for i in 0..dim {
            v.coords[i] = f(i);
        }
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for i in 0..self.dim as usize {
            acc += self.coords[i] * other.coords[i];
        }
        acc
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// The unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }

    /// `self + alpha * other`
    #[inline]
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Vector {
        let mut out = *self;
        for i in 0..self.dim as usize {
            out.coords[i] += alpha * other.coords[i];
        }
        out
    }

    pub fn centroid(points: &[Vector]) -> Option<Vector> {
        let first = points.first()?;
        let mut acc = Vector::zeros(first.dim());
        for p in points {
            acc += *p;
        }
        Some(acc * (1.0 / points.len() as f64))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(mut self, rhs: Vector) -> Vector {
        self += rhs;
        self
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim as usize {
            self.coords[i] += rhs.coords[i];
        }
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(mut self, rhs: Vector) -> Vector {
        self -= rhs;
        self
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Vector) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim as usize {
            self.coords[i] -= rhs.coords[i];
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn mul(mut self, rhs: f64) -> Vector {
        for i in 0..self.dim as usize {
            self.coords[i] *= rhs;
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    #[inline]
    fn neg(self) -> Vector {
        self * -1.0
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Vector::try_from_slice(&coords).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "expected 1..={MAX_DIM} finite coordinates, got {}",
                coords.len()
            ))
        })
    }
}
