use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{linalg, Vector};
use crate::sampling::{uniform_simplex, uniform_sphere, RngStream};

/// Above this cap height the construction is still built, but its size
/// windows are not expected to hold.
pub const CAP_T_THRESHOLD: f64 = 0.1;

/// Rejection attempts before a region is declared too small to sample.
const MAX_REJECTION_TRIES: usize = 2_000_000;

/// The simplex-and-cone construction inside the cap `C(x, t)`.
///
/// `w_0 = x`; `w_1..w_d` are the vertices of a regular `(d-1)`-simplex
/// inscribed in the boundary of the base disk of the cap; `Delta = [w_0..w_d]`
/// and `Delta_j = w_j + (Delta - w_j) / (4d)`.
#[derive(Debug, Clone)]
pub struct SimplexFamily {
    pub x: Vector,
    pub t: f64,
    /// `w_0, ..., w_d`.
    pub w: Vec<Vector>,
    /// Vertex lists of `Delta_0, ..., Delta_d`.
    pub small: Vec<Vec<Vector>>,
    /// Chord radius `sqrt(t) / 8` of `Sigma_1`.
    pub r1: f64,
    /// Chord radius `2 d sqrt(t)` of `Sigma_2`.
    pub r2: f64,
}

/// Builds the construction for unit `x` and `0 < t < 1`.
pub fn cap_construction(x: &Vector, t: f64) -> Result<SimplexFamily> {
    let d = x.dim();
    if d < 2 {
        return Err(Error::InvalidInput("cap construction needs d >= 2".into()));
    }
    let section = crate::geometry::cap_from_direction(x, t)?;
    let x = section.cap.direction();

    // regular simplex with d vertices on the unit sphere of R^{d-1}
    let ones = Vector::from_fn(d, |_| 1.0 / (d as f64).sqrt());
    let plane = linalg::complement_basis(&[ones], d);
    let unit_vertices: Vec<Vector> = (0..d)
        .map(|i| {
            let e = Vector::from_fn(d, |k| if k == i { 1.0 } else { 0.0 } - 1.0 / d as f64);
            let c = Vector::from_fn(d - 1, |k| e.dot(&plane[k]));
            c.normalized().expect("simplex vertex is nonzero")
        })
        .collect();

    let tangent = linalg::complement_basis(&[x], d);
    let mut w = vec![x];
    for u in &unit_vertices {
        let mut p = section.base_center;
        for (k, b) in tangent.iter().enumerate() {
            p = p.axpy(section.base_radius * u[k], b);
        }
        w.push(p);
    }
    let ratio = 1.0 / (4.0 * d as f64);
    let small = w
        .iter()
        .map(|wj| w.iter().map(|v| *wj + (*v - *wj) * ratio).collect())
        .collect();
    Ok(SimplexFamily {
        x,
        t,
        w,
        small,
        r1: t.sqrt() / 8.0,
        r2: 2.0 * d as f64 * t.sqrt(),
    })
}

/// Extreme angles of the normal cone at `z_0` measured from `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalConeWindow {
    pub min_tan: f64,
    pub max_tan: f64,
}

fn chord_to_angle(r: f64) -> f64 {
    2.0 * (0.5 * r).min(1.0).asin()
}

impl SimplexFamily {
    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `lambda_d(Delta_0)`.
    pub fn delta_volume(&self) -> f64 {
        linalg::simplex_volume(&self.small[0])
    }

    pub fn sample_delta<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Vector {
        uniform_simplex(&self.small[j], rng)
    }

    /// Angular radius of `Sigma_1` on the sphere.
    pub fn sigma1_half_angle(&self) -> f64 {
        chord_to_angle(self.r1)
    }

    /// Angular radius of `Sigma_2` on the sphere.
    pub fn sigma2_half_angle(&self) -> f64 {
        chord_to_angle(self.r2)
    }

    /// Whether the direction `r` lies in the dual cone `Sigma_2^*`, the cone
    /// about `-x` with half-angle `pi/2 - theta_2`.
    pub fn in_dual_sigma2(&self, r: &Vector) -> bool {
        let theta2 = self.sigma2_half_angle();
        if theta2 >= 0.5 * PI {
            return r.norm_sq() == 0.0;
        }
        -r.dot(&self.x) >= r.norm() * theta2.sin()
    }

    /// `tan` of the angle between `x` and the boundary of the normal cone of
    /// `[z_0, z_1..z_d]` at `z_0`, in the plane spanned by `x` and the unit
    /// vector `v` orthogonal to `x`.
    pub fn normal_cone_boundary_tan(z: &[Vector], x: &Vector, v: &Vector) -> f64 {
        let mut best = f64::INFINITY;
        for zj in &z[1..] {
            let e = *zj - z[0];
            let (ex, ev) = (e.dot(x), e.dot(v));
            if ev > 0.0 {
                best = best.min(-ex / ev);
            }
        }
        best
    }

    /// Normal-cone window at `z_0` over `directions` random unit vectors
    /// orthogonal to `x`.
    pub fn normal_cone_window<R: Rng + ?Sized>(
        &self,
        z: &[Vector],
        directions: usize,
        rng: &mut R,
    ) -> NormalConeWindow {
        let d = self.dim();
        let tangent = linalg::complement_basis(&[self.x], d);
        let mut window = NormalConeWindow {
            min_tan: f64::INFINITY,
            max_tan: 0.0,
        };
        for _ in 0..directions {
            let c = uniform_sphere(d - 1, rng);
            let v = tangent
                .iter()
                .enumerate()
                .fold(Vector::zeros(d), |acc, (k, b)| acc.axpy(c[k], b));
            let tan = Self::normal_cone_boundary_tan(z, &self.x, &v);
            window.min_tan = window.min_tan.min(tan);
            window.max_tan = window.max_tan.max(tan);
        }
        window
    }

    /// Whether `r` is a nonnegative combination of `z_j - z_0`.
    pub fn in_tangent_cone(z: &[Vector], r: &Vector) -> bool {
        let d = r.dim();
        let edges: Vec<Vector> = z[1..].iter().map(|zj| *zj - z[0]).collect();
        let a: Vec<Vec<f64>> = (0..d).map(|i| edges.iter().map(|e| e[i]).collect()).collect();
        let b: Vec<f64> = (0..d).map(|i| r[i]).collect();
        match linalg::solve_dense(a, b) {
            Some(mu) => mu.iter().all(|&m| m >= -1e-12 * r.norm()),
            None => false,
        }
    }

    /// Axis points `w_1' = (2x + w)/3` and `w_2' = (x + 2w)/3`, with `w` the
    /// centroid of the base facet of `Delta_0`.
    pub fn psi_anchors(&self) -> (Vector, Vector) {
        let d = self.dim();
        let w = Vector::centroid(&self.small[0][1..=d]).expect("nonempty facet");
        (self.x * (2.0 / 3.0) + w * (1.0 / 3.0), self.x * (1.0 / 3.0) + w * (2.0 / 3.0))
    }

    /// `y in Psi_1 = (w_1' - Sigma_2^*) cap Delta_0`, given `y in Delta_0`.
    pub fn in_psi1(&self, y: &Vector) -> bool {
        let (w1, _) = self.psi_anchors();
        self.in_dual_sigma2(&(w1 - *y))
    }

    /// `y in Psi_2 = (w_2' + Sigma_2^*) cap Delta_0`, given `y in Delta_0`.
    pub fn in_psi2(&self, y: &Vector) -> bool {
        let (_, w2) = self.psi_anchors();
        self.in_dual_sigma2(&(*y - w2))
    }

    /// Uniform point of `Psi_1` (`which = 1`) or `Psi_2` (`which = 2`) by
    /// rejection from `Delta_0`.
    pub fn sample_psi<R: Rng + ?Sized>(&self, which: u8, rng: &mut R) -> Result<Vector> {
        for _ in 0..MAX_REJECTION_TRIES {
            let y = self.sample_delta(0, rng);
            let hit = if which == 1 { self.in_psi1(&y) } else { self.in_psi2(&y) };
            if hit {
                return Ok(y);
            }
        }
        Err(Error::TooSmallCone {
            efficiency: 1.0 / MAX_REJECTION_TRIES as f64,
        })
    }

    /// Fraction of `Delta_0` covered by `Psi_1` and `Psi_2`.
    pub fn psi_fractions<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> (f64, f64) {
        let (mut a, mut b) = (0usize, 0usize);
        for _ in 0..samples {
            let y = self.sample_delta(0, rng);
            a += self.in_psi1(&y) as usize;
            b += self.in_psi2(&y) as usize;
        }
        (a as f64 / samples as f64, b as f64 / samples as f64)
    }

    /// Whether every sampled extreme point of `B^d \ C(x, gamma t)` lies in
    /// `z_0 + Sigma_2^*` for every vertex `z_0` of `Delta_0` (which covers all
    /// of `Delta_0`, the target set being convex in `z_0`).
    pub fn capind_holds<R: Rng + ?Sized>(&self, gamma: f64, samples: usize, rng: &mut R) -> bool {
        let d = self.dim();
        let height = gamma * self.t;
        if height >= 2.0 {
            return true;
        }
        let phi_min = (1.0 - height).acos();
        let tangent = linalg::complement_basis(&[self.x], d);
        for i in 0..samples {
            // polar angles from the boundary of the cap down to the antipode
            let phi = phi_min + (PI - phi_min) * (i % 64) as f64 / 63.0;
            let c = uniform_sphere(d - 1, rng);
            let v = tangent
                .iter()
                .enumerate()
                .fold(Vector::zeros(d), |acc, (k, b)| acc.axpy(c[k], b));
            let y = self.x * phi.cos() + v * phi.sin();
            if self.small[0].iter().any(|z0| !self.in_dual_sigma2(&(y - *z0))) {
                return false;
            }
        }
        true
    }
}

fn gamma_cache() -> &'static Mutex<HashMap<usize, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Smallest `gamma` in the doubling sequence `4, 8, 16, ...` for which
/// `B^d \ C(x, gamma t)` lies in `z_0 + Sigma_2^*` at every tested `t`;
/// cached per dimension.
pub fn capind_gamma(d: usize) -> Result<f64> {
    if let Some(g) = gamma_cache().lock().unwrap().get(&d) {
        return Ok(*g);
    }
    let x = Vector::unit(d, 0);
    let families = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&t| cap_construction(&x, t))
        .collect::<Result<Vec<_>>>()?;
    let mut gamma = 4.0;
    for _ in 0..16 {
        let mut rng = RngStream::keyed(0xCA91D, &[d as u64]).rng();
        if families.iter().all(|f| f.capind_holds(gamma, 4096, &mut rng)) {
            gamma_cache().lock().unwrap().insert(d, gamma);
            return Ok(gamma);
        }
        gamma *= 2.0;
    }
    Err(Error::IllConditioned(format!("no capind constant found for d={d}")))
}
