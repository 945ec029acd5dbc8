use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::{cap_height_for_volume, cap_volume, wet_part};
use crate::error::{Error, Result};
use crate::geometry::{linalg::ball_volume, Vector};
use crate::sampling::{uniform_sphere, RngStream};

/// Enlargement factor of the covering caps and shrink factor of the inner
/// caps.
pub const COVER_BETA: f64 = 8.0;
/// Packing separation in units of `sqrt(h)`.
pub const COVER_SEPARATION: f64 = 2.0;

/// Candidate points drawn per expected packing point.
const CANDIDATE_FACTOR: f64 = 40.0;

/// Caps `C_i = C(y_i, beta h)` and inner caps `C_i' = C(y_i, h / beta)` about
/// a maximal `c sqrt(h)`-separated set of sphere points `y_i`, where `h` is
/// the height of the cap of volume `t kappa_d`.
#[derive(Debug, Clone, Serialize)]
pub struct CapCover {
    pub dim: usize,
    /// Cap volume as a fraction of `kappa_d`.
    pub t: f64,
    pub cap_height: f64,
    pub separation: f64,
    pub centers: Vec<Vector>,
}

/// Verification statistics of a [`CapCover`].
#[derive(Debug, Clone, Serialize)]
pub struct CoverAudit {
    pub m: usize,
    /// `t < (2d)^(-2d)`.
    pub below_threshold: bool,
    /// `lambda_d(K(t)) / kappa_d`.
    pub wet_fraction: f64,
    /// `m t / (lambda_d(K(t)) / kappa_d)`.
    pub ratio: f64,
    /// `V(C_i) / (t kappa_d)` and `V(C_i') / (t kappa_d)`.
    pub outer_volume_ratio: f64,
    pub inner_volume_ratio: f64,
    pub sampled_points: usize,
    pub uncovered_points: usize,
    pub inner_disjoint: bool,
    pub sampled_caps: usize,
    /// Sampled caps missing `K(v > t)` and not contained in any `C_i`.
    pub uncontained_caps: usize,
}

fn cell_of(p: &Vector, size: f64) -> Vec<i64> {
    p.as_slice().iter().map(|c| (c / size).floor() as i64).collect()
}

fn neighbour_cells(cell: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(cell.len())];
    for &c in cell {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-1..=1).map(move |o| {
                    let mut next = prefix.clone();
                    next.push(c + o);
                    next
                })
            })
            .collect();
    }
    out
}

/// Greedy maximal packing of random sphere points at chord separation
/// `c sqrt(h)`, with `t` the cap volume as a fraction of `kappa_d`.
pub fn economic_cover(d: usize, t: f64, stream: RngStream) -> Result<CapCover> {
    if d < 2 {
        return Err(Error::InvalidInput("cap covers need d >= 2".into()));
    }
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::InvalidInput(format!("t must lie in (0, 1/2], got {t}")));
    }
    let h = cap_height_for_volume(d, t * ball_volume(d))?;
    let sep = COVER_SEPARATION * h.sqrt();
    let sphere_area = d as f64 * ball_volume(d);
    let expected = sphere_area / (ball_volume(d - 1) * (0.5 * sep).powi(d as i32 - 1));
    let candidates = (CANDIDATE_FACTOR * expected).max(1000.0) as usize;

    let mut rng = stream.rng();
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut centers: Vec<Vector> = Vec::new();
    for _ in 0..candidates {
        let y = uniform_sphere(d, &mut rng);
        let cell = cell_of(&y, sep);
        let clash = neighbour_cells(&cell).iter().any(|c| {
            grid.get(c)
                .is_some_and(|ids| ids.iter().any(|&i| centers[i].distance(&y) < sep))
        });
        if !clash {
            grid.entry(cell).or_default().push(centers.len());
            centers.push(y);
        }
    }
    Ok(CapCover {
        dim: d,
        t,
        cap_height: h,
        separation: sep,
        centers,
    })
}

impl CapCover {
    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn outer_height(&self) -> f64 {
        (COVER_BETA * self.cap_height).min(2.0)
    }

    pub fn inner_height(&self) -> f64 {
        self.cap_height / COVER_BETA
    }

    /// Whether `p` (in the ball) lies in some `C_i`.
    pub fn covers(&self, p: &Vector) -> bool {
        let level = 1.0 - self.outer_height();
        p.norm_sq() <= 1.0 && self.centers.iter().any(|y| p.dot(y) >= level)
    }

    /// Exact test: `C(y, h')` and `C(y', h')` are disjoint iff the angle
    /// between `y` and `y'` exceeds `2 arccos(1 - h')`.
    pub fn inner_disjoint(&self) -> bool {
        let limit = 2.0 * (1.0 - self.inner_height()).acos();
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[i + 1..] {
                if a.dot(b).clamp(-1.0, 1.0).acos() <= limit {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the cap `C(u, height)` lies in some `C_i` (exact angular test).
    pub fn contains_cap(&self, u: &Vector, height: f64) -> bool {
        let outer = (1.0 - self.outer_height()).acos();
        let rho = (1.0 - height).acos();
        self.centers
            .iter()
            .any(|y| y.dot(u).clamp(-1.0, 1.0).acos() + rho <= outer)
    }

    /// Samples `points` uniform points of the wet part and `caps` random caps
    /// of height at most `h` and checks them against the cover.
    pub fn audit(&self, points: usize, caps: usize, stream: RngStream) -> Result<CoverAudit> {
        let d = self.dim;
        let kappa = ball_volume(d);
        let wet = wet_part(d, self.t * kappa)?;
        let mut rng = stream.rng();
        let inner_shell = (1.0 - self.cap_height).powi(d as i32);
        let mut uncovered = 0;
        for _ in 0..points {
            let u = uniform_sphere(d, &mut rng);
            let r = (inner_shell + (1.0 - inner_shell) * rng.random::<f64>()).powf(1.0 / d as f64);
            if !self.covers(&(u * r)) {
                uncovered += 1;
            }
        }
        let mut uncontained = 0;
        for _ in 0..caps {
            let u = uniform_sphere(d, &mut rng);
            let height = self.cap_height * (1.0 - rng.random::<f64>());
            if !self.contains_cap(&u, height) {
                uncontained += 1;
            }
        }
        let wet_fraction = wet.wet_volume / kappa;
        let target = self.t * kappa;
        Ok(CoverAudit {
            m: self.m(),
            below_threshold: self.t < (2.0 * d as f64).powi(-2 * d as i32),
            wet_fraction,
            ratio: self.m() as f64 * self.t / wet_fraction,
            outer_volume_ratio: cap_volume(d, self.outer_height()) / target,
            inner_volume_ratio: cap_volume(d, self.inner_height()) / target,
            sampled_points: points,
            uncovered_points: uncovered,
            inner_disjoint: self.inner_disjoint(),
            sampled_caps: caps,
            uncontained_caps: uncontained,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_is_separated_and_maximal() {
        let cover = economic_cover(2, 1e-3, RngStream::new(1, 0)).unwrap();
        let sep = cover.separation;
        for (i, a) in cover.centers.iter().enumerate() {
            for b in &cover.centers[i + 1..] {
                assert!(a.distance(b) >= sep);
            }
        }
        // on the circle a maximal packing has no gap of two separations
        let mut angles: Vec<f64> = cover.centers.iter().map(|y| y[1].atan2(y[0])).collect();
        angles.sort_by(f64::total_cmp);
        angles.push(angles[0] + 2.0 * std::f64::consts::PI);
        let gap_limit = 2.0 * 2.0 * (sep / 2.0).asin() * 1.0001;
        assert!(angles.windows(2).all(|w| w[1] - w[0] < gap_limit));
    }

    #[test]
    fn audit_of_a_small_cover() {
        for d in [2usize, 3] {
            let cover = economic_cover(d, 1e-3, RngStream::new(2, d as u64)).unwrap();
            let audit = cover.audit(2000, 500, RngStream::new(3, d as u64)).unwrap();
            assert_eq!(audit.uncovered_points, 0);
            assert_eq!(audit.uncontained_caps, 0);
            assert!(audit.inner_disjoint);
            assert!(audit.outer_volume_ratio > 1.0 && audit.inner_volume_ratio < 1.0);
        }
    }

    #[test]
    fn deterministic_given_the_stream() {
        let a = economic_cover(3, 1e-3, RngStream::new(4, 0)).unwrap();
        let b = economic_cover(3, 1e-3, RngStream::new(4, 0)).unwrap();
        assert_eq!(a.centers, b.centers);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(economic_cover(2, 0.0, RngStream::new(0, 0)).is_err());
        assert!(economic_cover(2, 0.7, RngStream::new(0, 0)).is_err());
        assert!(economic_cover(1, 0.1, RngStream::new(0, 0)).is_err());
    }
}
