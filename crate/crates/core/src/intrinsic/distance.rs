//! Euclidean distance from a point to the convex hull of a finite point set
//! (Gilbert–Johnson–Keerthi iteration with an exhaustive sub-simplex search).
//!
//! Works for point sets of any affine dimension, so segments and flat
//! polygons are handled like full-dimensional polytopes.

use crate::geometry::{linalg, Vector, MAX_DIM};

const MAX_ITER: usize = 256;

/// Distance from `y` to `conv(points)`.
pub fn distance_to_hull(points: &[Vector], y: &Vector) -> f64 {
    assert!(!points.is_empty(), "empty point set");
    let mut simplex: Vec<Vector> = vec![points[0] - *y];
    let mut x = simplex[0];
    for _ in 0..MAX_ITER {
        let xx = x.norm_sq();
        if xx == 0.0 {
            return 0.0;
        }
        let w = points
            .iter()
            .map(|p| *p - *y)
            .min_by(|a, b| a.dot(&x).total_cmp(&b.dot(&x)))
            .unwrap();
        // no support point improves on the current one: x is optimal
        if xx - x.dot(&w) <= 1e-12 * xx {
            return xx.sqrt();
        }
        if simplex.iter().any(|s| *s == w) {
            return xx.sqrt();
        }
        simplex.push(w);
        let (next, kept) = min_norm_point(&simplex);
        simplex = kept;
        if next.norm_sq() >= xx {
            // numerical stagnation
            return xx.sqrt().min(next.norm());
        }
        x = next;
        if simplex.len() == x.dim() + 1 {
            return 0.0;
        }
    }
    x.norm()
}

/// Minimum-norm point of `conv(simplex)` and the vertices of the face whose
/// relative interior contains it.
fn min_norm_point(simplex: &[Vector]) -> (Vector, Vec<Vector>) {
    let k = simplex.len();
    debug_assert!(k <= MAX_DIM + 1);
    let mut best: Option<(f64, Vector, u32)> = None;
    for mask in 1u32..(1u32 << k) {
        let members: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let Some((point, weights)) = affine_projection_of_origin(simplex, &members) else {
            continue;
        };
        if weights.iter().any(|&w| w <= 0.0) {
            continue;
        }
        let n = point.norm_sq();
        if best.as_ref().map_or(true, |(bn, _, _)| n < *bn) {
            best = Some((n, point, mask));
        }
    }
    let (_, point, mask) = best.expect("singletons are always admissible");
    let kept = (0..k)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| simplex[i])
        .collect();
    (point, kept)
}

/// Projection of the origin onto the affine hull of the chosen vertices,
/// with its barycentric weights. `None` when the vertices are affinely
/// dependent.
fn affine_projection_of_origin(simplex: &[Vector], members: &[usize]) -> Option<(Vector, Vec<f64>)> {
    let base = simplex[members[0]];
    if members.len() == 1 {
        return Some((base, vec![1.0]));
    }
    let edges: Vec<Vector> = members[1..].iter().map(|&i| simplex[i] - base).collect();
    let m = edges.len();
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| edges[i].dot(&edges[j])).collect())
        .collect();
    let rhs: Vec<f64> = edges.iter().map(|e| -e.dot(&base)).collect();
    // reject nearly dependent edge sets
    linalg::orthonormalize(&edges, 1e-10)?;
    let mu = linalg::solve_dense(gram, rhs)?;
    let mut point = base;
    for (e, c) in edges.iter().zip(&mu) {
        point = point.axpy(*c, e);
    }
    let mut weights = Vec::with_capacity(m + 1);
    weights.push(1.0 - mu.iter().sum::<f64>());
    weights.extend(mu);
    Some((point, weights))
}
