//! Small dense linear algebra for dimensions up to [`MAX_DIM`].

use super::vector::{Vector, MAX_DIM};

/// Orthonormalizes `vectors` by modified Gram–Schmidt with one pass of
/// re-orthogonalization.
///
/// Returns `None` when some vector keeps less than `rel_tol` of its original
/// norm after removing the span of its predecessors.
pub fn orthonormalize(vectors: &[Vector], rel_tol: f64) -> Option<Vec<Vector>> {
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            return None;
        }
        let mut r = *v;
        for _ in 0..2 {
            for b in &basis {
                r = r.axpy(-r.dot(b), b);
            }
        }
        let residual = r.norm();
        if residual < rel_tol * original {
            return None;
        }
        basis.push(r * (1.0 / residual));
    }
    Some(basis)
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^dim`.
///
/// `basis` must already be orthonormal.
pub fn complement_basis(basis: &[Vector], dim: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(dim.saturating_sub(basis.len()));
    while basis.len() + out.len() < dim {
        // pick the coordinate axis with the largest residual
        let mut best: Option<(f64, Vector)> = None;
        for i in 0..dim {
            let mut r = Vector::unit(dim, i);
            for _ in 0..2 {
                for b in basis.iter().chain(out.iter()) {
                    r = r.axpy(-r.dot(b), b);
                }
            }
            let n = r.norm();
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        let (n, r) = best.expect("dim >= 1");
        out.push(r * (1.0 / n));
    }
    out
}

/// Determinant of the square matrix whose rows are `rows`, by LU with
/// partial pivoting.
pub fn determinant(rows: &[Vector]) -> f64 {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.dim() == n));
    let mut a = [[0.0f64; MAX_DIM]; MAX_DIM];
    for (i, r) in rows.iter().enumerate() {
        a[i][..n].copy_from_slice(r.as_slice());
    }
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for i in col + 1..n {
            let f = a[i][col] / p;
            if f != 0.0 {
                for j in col + 1..n {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    det
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for a (numerically) singular matrix.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

/// Inverse of a dense symmetric positive-definite or general square matrix.
pub fn invert_dense(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        cols.push(solve_dense(a.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// `k`-dimensional volume of the simplex with the given `k + 1` vertices,
/// embedded in any ambient dimension, via the Gram determinant.
pub fn simplex_volume(vertices: &[Vector]) -> f64 {
    let k = vertices.len().saturating_sub(1);
    if k == 0 {
        return 1.0;
    }
    let base = vertices[0];
    let edges: Vec<Vector> = vertices[1..].iter().map(|v| *v - base).collect();
    if k == 1 {
        return edges[0].norm();
    }
    let dim = base.dim();
    if k == dim {
        return determinant(&edges).abs() / factorial(k);
    }
    let gram: Vec<Vector> = (0..k)
        .map(|i| Vector::from_fn(k, |j| edges[i].dot(&edges[j])))
        .collect();
    determinant(&gram).max(0.0).sqrt() / factorial(k)
}

/// Dimension of the affine hull of `points`, with relative tolerance
/// `rel_tol` against the diameter-scale of the set.
pub fn affine_dimension(points: &[Vector], rel_tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = points[0];
    let scale = points
        .iter()
        .map(|p| (*p - base).norm())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vector> = Vec::new();
    for p in &points[1..] {
        let mut r = *p - base;
        for _ in 0..2 {
            for b in &basis {
                r = r.axpy(-r.dot(b), b);
            }
        }
        let n = r.norm();
        if n > rel_tol * scale {
            basis.push(r * (1.0 / n));
            if basis.len() == base.dim() {
                break;
            }
        }
    }
    basis.len()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Volume `kappa_j` of the `j`-dimensional unit ball.
pub fn ball_volume(j: usize) -> f64 {
    // kappa_j = kappa_{j-2} * 2 pi / j
    let mut k = if j % 2 == 0 { 1.0 } else { 2.0 };
    let mut i = if j % 2 == 0 { 2 } else { 3 };
    while i <= j {
        k *= 2.0 * std::f64::consts::PI / i as f64;
        i += 2;
    }
    k
}
