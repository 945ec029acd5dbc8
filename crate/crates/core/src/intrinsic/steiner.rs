use rand::Rng;

use super::distance::distance_to_hull;
use super::{IntrinsicEstimate, Method};
use crate::error::{Error, Result};
use crate::geometry::{linalg, Vector};
use crate::hull::{convex_hull, Polytope};
use crate::sampling::RngStream;

/// A compact convex set that can report its distance to a point.
pub trait ConvexSet {
    fn dim(&self) -> usize;
    /// Axis-aligned bounding box `(lo, hi)`.
    fn bounding_box(&self) -> (Vector, Vector);
    /// `lambda_d` of the set (zero when it is not full-dimensional).
    fn volume(&self) -> f64;
    fn distance(&self, y: &Vector) -> f64;
    /// A cheap lower bound on [`ConvexSet::distance`]; `<= 0` means "inside
    /// or unknown".
    fn distance_lower_bound(&self, _y: &Vector) -> f64 {
        f64::NEG_INFINITY
    }
}

fn bounding_box_of(points: &[Vector]) -> (Vector, Vector) {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for i in 0..p.dim() {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

impl ConvexSet for Polytope {
    fn dim(&self) -> usize {
        Polytope::dim(self)
    }

    fn bounding_box(&self) -> (Vector, Vector) {
        bounding_box_of(self.vertices())
    }

    fn volume(&self) -> f64 {
        Polytope::volume(self)
    }

    fn distance(&self, y: &Vector) -> f64 {
        if self.max_violation(y) <= 0.0 {
            return 0.0;
        }
        distance_to_hull(self.vertices(), y)
    }

    fn distance_lower_bound(&self, y: &Vector) -> f64 {
        self.max_violation(y)
    }
}

/// Convex hull of a point set of any affine dimension (segments, flat
/// polygons, ...), handled through distance queries only.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Vector>,
}

impl PointSet {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let dim = points
            .first()
            .ok_or_else(|| Error::InvalidInput("empty point set".into()))?
            .dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidInput("mixed dimensions".into()));
        }
        Ok(PointSet { points })
    }
}

impl ConvexSet for PointSet {
    fn dim(&self) -> usize {
        self.points[0].dim()
    }

    fn bounding_box(&self) -> (Vector, Vector) {
        bounding_box_of(&self.points)
    }

    fn volume(&self) -> f64 {
        let d = self.dim();
        if linalg::affine_dimension(&self.points, 1e-9) < d {
            return 0.0;
        }
        convex_hull(&self.points, d).map(|p| p.volume()).unwrap_or(0.0)
    }

    fn distance(&self, y: &Vector) -> f64 {
        distance_to_hull(&self.points, y)
    }
}

/// Result of the Steiner polynomial fit.
#[derive(Debug, Clone)]
pub struct SteinerFit {
    /// `V_0, ..., V_d`; `V_d` is the exact volume.
    pub estimates: Vec<IntrinsicEstimate>,
    /// `(lambda, estimated vol(P + lambda B) - vol(P), standard error)`.
    pub shells: Vec<(f64, f64, f64)>,
}

impl SteinerFit {
    pub fn get(&self, s: usize) -> Option<&IntrinsicEstimate> {
        self.estimates.get(s)
    }
}

fn check_grid(grid: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut sorted: Vec<f64> = grid.to_vec();
    if sorted.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidInput("lambda grid must be positive".into()));
    }
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < d + 1 {
        return Err(Error::InvalidInput(format!(
            "lambda grid needs at least {} distinct values, got {}",
            d + 1,
            sorted.len()
        )));
    }
    let spread = sorted[sorted.len() - 1] - sorted[0];
    let uniform_gap = spread / (sorted.len() - 1) as f64;
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap * 10.0 < uniform_gap {
        return Err(Error::IllConditioned(format!(
            "lambda spacing {min_gap:e} is more than 10x below the uniform spacing {uniform_gap:e}"
        )));
    }
    Ok(sorted)
}

/// Estimates all intrinsic volumes from `vol(P + lambda B^d)` on a grid of
/// `lambda` values.
///
/// Each parallel-body volume is estimated by hit-or-miss sampling of `hits`
/// points in the `lambda`-enlarged bounding box (one sub-stream per grid
/// value). The constant term is pinned to the exact volume; the coefficients
/// `kappa_{d-s} V_s` of `lambda^{d-s}` are fitted by weighted least squares.
pub fn steiner_fit_oracle<P: ConvexSet>(
    body: &P,
    grid: &[f64],
    hits: usize,
    stream: RngStream,
) -> Result<SteinerFit> {
    let d = body.dim();
    let grid = check_grid(grid, d)?;
    if hits < 2 {
        return Err(Error::InvalidInput("need at least two hit samples".into()));
    }
    let base_volume = body.volume();
    let (lo, hi) = body.bounding_box();

    let shells: Vec<(f64, f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(gi, &lambda)| {
            let mut rng = RngStream::keyed(stream.seed, &[stream.stream_id, gi as u64]).rng();
            let box_lo = Vector::from_fn(d, |i| lo[i] - lambda);
            let side = Vector::from_fn(d, |i| hi[i] - lo[i] + 2.0 * lambda);
            let box_volume: f64 = side.as_slice().iter().product();
            let mut shell_hits = 0usize;
            for _ in 0..hits {
                let y = Vector::from_fn(d, |i| box_lo[i] + side[i] * rng.random::<f64>());
                let bound = body.distance_lower_bound(&y);
                if bound > lambda {
                    continue;
                }
                let dist = body.distance(&y);
                if dist > 0.0 && dist <= lambda {
                    shell_hits += 1;
                }
            }
            let frac = shell_hits as f64 / hits as f64;
            let var_frac = (frac * (1.0 - frac)).max(1.0 / hits as f64) / hits as f64;
            (lambda, box_volume * frac, box_volume * var_frac.sqrt())
        })
        .collect();

    // weighted least squares for a_j = kappa_j V_{d-j}, j = 1..d
    let mut normal = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    for &(lambda, shell, se) in &shells {
        let w = 1.0 / (se * se);
        let powers: Vec<f64> = (1..=d).map(|j| lambda.powi(j as i32)).collect();
        for i in 0..d {
            rhs[i] += w * powers[i] * shell;
            for j in 0..d {
                normal[i][j] += w * powers[i] * powers[j];
            }
        }
    }
    let coeffs = linalg::solve_dense(normal.clone(), rhs)
        .ok_or_else(|| Error::IllConditioned("singular Steiner normal equations".into()))?;
    let cov = linalg::invert_dense(&normal)
        .ok_or_else(|| Error::IllConditioned("singular Steiner normal equations".into()))?;

    let mut estimates = vec![
        IntrinsicEstimate {
            s: d,
            value: base_volume,
            std_error: 0.0,
            method: Method::SteinerFit,
        };
        d + 1
    ];
    for j in 1..=d {
        let s = d - j;
        let kappa = linalg::ball_volume(j);
        estimates[s] = IntrinsicEstimate {
            s,
            value: coeffs[j - 1] / kappa,
            std_error: cov[j - 1][j - 1].max(0.0).sqrt() / kappa,
            method: Method::SteinerFit,
        };
    }
    Ok(SteinerFit { estimates, shells })
}
