//! Convex hulls in dimension `1..=8`.
//!
//! The hull is built incrementally (beneath-beyond): every facet keeps the
//! list of not-yet-processed points above it, the furthest such point is
//! inserted next, the facets it sees are removed and the horizon is coned to
//! the new vertex. Facets are simplices during construction; coplanar
//! neighbours are merged afterwards so that e.g. a cube has six square
//! facets, while the simplicial pieces are kept as a boundary triangulation.
//!
//! Degenerate configurations are not perturbed. When a new facet would be
//! flatter than [`ORIENT_TOL`] the construction fails with
//! [`Error::DegenerateInput`]; for absolutely continuous inputs this has
//! probability zero and the caller redraws the replication.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{linalg, Vector, MAX_DIM};

/// Tolerance on the normalized determinant (relative residual of the
/// Gram–Schmidt edge basis) below which a simplex is considered flat.
pub const ORIENT_TOL: f64 = 1e-10;
/// Tolerance of the facet inequalities satisfied by every vertex.
pub const FACET_TOL: f64 = 1e-9;
/// Relative plane distance below which a point counts as coplanar.
const VISIBILITY_TOL: f64 = 1e-12;

/// A facet `{y : <y, normal> = offset}` with unit outer normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

/// One simplex of the boundary triangulation, tagged with its facet.
#[derive(Debug, Clone, Copy)]
struct Piece {
    vertices: [u32; MAX_DIM],
    facet: u32,
}

/// A full-dimensional convex polytope with its facets and a triangulation
/// of its boundary.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector>,
    facets: Vec<Facet>,
    pieces: Vec<Piece>,
    interior: Vector,
}

/// The `k`-dimensional faces of a polytope, as sorted vertex index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSet {
    pub k: usize,
    pub faces: Vec<Vec<usize>>,
}

/// Convex hull of `points` in `R^dim`.
pub fn convex_hull(points: &[Vector], dim: usize) -> Result<Polytope> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "hull dimension must be in 1..={MAX_DIM}, got {dim}"
        )));
    }
    if points.iter().any(|p| p.dim() != dim || !p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "all points must be finite and {dim}-dimensional"
        )));
    }
    if points.len() < dim + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span a {dim}-dimensional hull",
            points.len()
        )));
    }
    if dim == 1 {
        return hull_1d(points);
    }
    HullBuilder::new(points, dim)?.run()
}

/// `lambda_d(P)`.
pub fn polytope_volume(p: &Polytope) -> f64 {
    p.volume()
}

pub fn enumerate_faces(p: &Polytope, k: usize) -> Result<FaceSet> {
    p.faces(k)
}

/// Largest `r` with `r B^d` inside `P`.
pub fn min_facet_offset(p: &Polytope) -> Result<f64> {
    p.min_facet_offset()
}

fn hull_1d(points: &[Vector]) -> Result<Polytope> {
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, p) in points.iter().enumerate() {
        if p[0] < points[lo][0] {
            lo = i;
        }
        if p[0] > points[hi][0] {
            hi = i;
        }
    }
    let (a, b) = (points[lo][0], points[hi][0]);
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    if b - a <= ORIENT_TOL * scale {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let vertices = vec![points[lo], points[hi]];
    let mut pieces = Vec::new();
    for i in 0..2u32 {
        let mut v = [0u32; MAX_DIM];
        v[0] = i;
        pieces.push(Piece {
            vertices: v,
            facet: i,
        });
    }
    Ok(Polytope {
        dim: 1,
        facets: vec![
            Facet {
                normal: Vector::new(&[-1.0]),
                offset: -a,
                vertices: vec![0],
            },
            Facet {
                normal: Vector::new(&[1.0]),
                offset: b,
                vertices: vec![1],
            },
        ],
        interior: Vector::new(&[0.5 * (a + b)]),
        vertices,
        pieces,
    })
}

struct WorkFacet {
    verts: [usize; MAX_DIM],
    neighbors: [usize; MAX_DIM],
    normal: Vector,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl WorkFacet {
    #[inline]
    fn distance(&self, p: &Vector) -> f64 {
        p.dot(&self.normal) - self.offset
    }
}

struct HullBuilder<'a> {
    points: &'a [Vector],
    dim: usize,
    eps: f64,
    interior: Vector,
    facets: Vec<WorkFacet>,
    // per-facet visit stamps for the visibility search
    stamp: Vec<u64>,
    visible_flag: Vec<bool>,
    epoch: u64,
}

impl<'a> HullBuilder<'a> {
    fn new(points: &'a [Vector], dim: usize) -> Result<Self> {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for i in 0..dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let scale = (hi - lo).norm();
        if scale == 0.0 {
            return Err(Error::DegenerateInput("all points coincide".into()));
        }
        Ok(HullBuilder {
            points,
            dim,
            eps: VISIBILITY_TOL * scale,
            interior: Vector::zeros(dim),
            facets: Vec::new(),
            stamp: Vec::new(),
            visible_flag: Vec::new(),
            epoch: 0,
        })
    }

    /// Greedily picks `d + 1` points spanning a simplex of large volume.
    fn initial_simplex(&self) -> Result<Vec<usize>> {
        let pts = self.points;
        let d = self.dim;
        let first = (0..pts.len())
            .min_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]))
            .unwrap();
        let mut chosen = vec![first];
        let mut basis: Vec<Vector> = Vec::new();
        let base = pts[first];
        let scale = pts
            .iter()
            .map(|p| (*p - base).norm())
            .fold(0.0f64, f64::max);
        while chosen.len() < d + 1 {
            let mut best = (0.0f64, usize::MAX, Vector::zeros(d));
            for (i, p) in pts.iter().enumerate() {
                let mut r = *p - base;
                for b in &basis {
                    r = r.axpy(-r.dot(b), b);
                }
                let n = r.norm_sq();
                if n > best.0 {
                    best = (n, i, r);
                }
            }
            let (n2, idx, mut r) = best;
            if idx == usize::MAX || n2.sqrt() <= ORIENT_TOL * scale {
                return Err(Error::DegenerateInput(format!(
                    "points span only {} dimensions",
                    chosen.len() - 1
                )));
            }
            for b in &basis {
                r = r.axpy(-r.dot(b), b);
            }
            basis.push(r.normalized().unwrap());
            chosen.push(idx);
        }
        Ok(chosen)
    }

    fn plane_through(&self, verts: &[usize]) -> Result<(Vector, f64)> {
        let p0 = self.points[verts[0]];
        let edges: Vec<Vector> = verts[1..].iter().map(|&v| self.points[v] - p0).collect();
        let basis = linalg::orthonormalize(&edges, ORIENT_TOL).ok_or_else(|| {
            Error::DegenerateInput("near-coplanar points below the orientation tolerance".into())
        })?;
        let mut normal = linalg::complement_basis(&basis, self.dim)[0];
        let mut offset = normal.dot(&p0);
        if normal.dot(&self.interior) > offset {
            normal = -normal;
            offset = -offset;
        }
        Ok((normal, offset))
    }

    fn push_facet(&mut self, verts: [usize; MAX_DIM], neighbors: [usize; MAX_DIM]) -> Result<usize> {
        let (normal, offset) = self.plane_through(&verts[..self.dim])?;
        self.facets.push(WorkFacet {
            verts,
            neighbors,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        });
        self.stamp.push(0);
        self.visible_flag.push(false);
        Ok(self.facets.len() - 1)
    }

    fn run(mut self) -> Result<Polytope> {
        let d = self.dim;
        let simplex = self.initial_simplex()?;
        let simplex_pts: Vec<Vector> = simplex.iter().map(|&i| self.points[i]).collect();
        self.interior = Vector::centroid(&simplex_pts).unwrap();

        // facet i omits simplex vertex i; its neighbour across vertex j is facet j
        for i in 0..=d {
            let mut verts = [usize::MAX; MAX_DIM];
            let mut neighbors = [usize::MAX; MAX_DIM];
            let mut k = 0;
            for j in 0..=d {
                if j != i {
                    verts[k] = simplex[j];
                    neighbors[k] = j;
                    k += 1;
                }
            }
            self.push_facet(verts, neighbors)?;
        }

        let mut in_simplex = vec![false; self.points.len()];
        for &i in &simplex {
            in_simplex[i] = true;
        }
        for (idx, p) in self.points.iter().enumerate() {
            if in_simplex[idx] {
                continue;
            }
            let mut best = (self.eps, usize::MAX);
            for (fi, f) in self.facets.iter().enumerate() {
                let dist = f.distance(p);
                if dist > best.0 {
                    best = (dist, fi);
                }
            }
            if best.1 != usize::MAX {
                self.facets[best.1].outside.push(idx);
            }
        }

        let mut stack: Vec<usize> = (0..self.facets.len())
            .filter(|&f| !self.facets[f].outside.is_empty())
            .collect();

        let mut visible: Vec<usize> = Vec::new();
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut new_facets: Vec<usize> = Vec::new();
        let mut ridge_map: HashMap<[usize; MAX_DIM], (usize, usize)> = HashMap::new();
        let mut orphans: Vec<usize> = Vec::new();

        while let Some(fid) = stack.pop() {
            if !self.facets[fid].alive || self.facets[fid].outside.is_empty() {
                continue;
            }
            // furthest outside point
            let (pos, apex) = {
                let f = &self.facets[fid];
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (k, &q) in f.outside.iter().enumerate() {
                    let dist = f.distance(&self.points[q]);
                    if dist > best.0 {
                        best = (dist, k);
                    }
                }
                (best.1, f.outside[best.1])
            };
            self.facets[fid].outside.swap_remove(pos);
            let p = self.points[apex];

            // visible region and its horizon
            self.epoch += 1;
            visible.clear();
            horizon.clear();
            visible.push(fid);
            self.stamp[fid] = self.epoch;
            self.visible_flag[fid] = true;
            let mut head = 0;
            while head < visible.len() {
                let g = visible[head];
                head += 1;
                for slot in 0..d {
                    let nb = self.facets[g].neighbors[slot];
                    if self.stamp[nb] != self.epoch {
                        self.stamp[nb] = self.epoch;
                        let vis = self.facets[nb].distance(&p) > self.eps;
                        self.visible_flag[nb] = vis;
                        if vis {
                            visible.push(nb);
                        }
                    }
                    if !self.visible_flag[nb] {
                        horizon.push((g, slot));
                    }
                }
            }

            // cone the horizon to the apex
            new_facets.clear();
            ridge_map.clear();
            for &(g, slot) in &horizon {
                let outer = self.facets[g].neighbors[slot];
                let mut verts = [usize::MAX; MAX_DIM];
                let mut k = 0;
                for j in 0..d {
                    if j != slot {
                        verts[k] = self.facets[g].verts[j];
                        k += 1;
                    }
                }
                verts[d - 1] = apex;
                let mut neighbors = [usize::MAX; MAX_DIM];
                neighbors[d - 1] = outer;
                let nf = self.push_facet(verts, neighbors)?;
                // re-point the surviving neighbour at the new facet
                let back = self.facets[outer]
                    .neighbors
                    .iter()
                    .position(|&x| x == g)
                    .expect("adjacency is symmetric");
                self.facets[outer].neighbors[back] = nf;
                // link new facets sharing a ridge through the apex
                for j in 0..d - 1 {
                    let mut key = [usize::MAX; MAX_DIM];
                    let mut m = 0;
                    for (jj, &v) in verts[..d - 1].iter().enumerate() {
                        if jj != j {
                            key[m] = v;
                            m += 1;
                        }
                    }
                    key[..m].sort_unstable();
                    match ridge_map.remove(&key) {
                        Some((other, other_slot)) => {
                            self.facets[nf].neighbors[j] = other;
                            self.facets[other].neighbors[other_slot] = nf;
                        }
                        None => {
                            ridge_map.insert(key, (nf, j));
                        }
                    }
                }
                new_facets.push(nf);
            }
            if !ridge_map.is_empty() {
                return Err(Error::DegenerateInput(
                    "horizon is not a closed ridge cycle".into(),
                ));
            }

            // hand the orphaned outside points to the new facets
            orphans.clear();
            for &g in &visible {
                let f = &mut self.facets[g];
                f.alive = false;
                orphans.append(&mut f.outside);
            }
            for &q in &orphans {
                let pt = self.points[q];
                let mut best = (self.eps, usize::MAX);
                for &nf in &new_facets {
                    let dist = self.facets[nf].distance(&pt);
                    if dist > best.0 {
                        best = (dist, nf);
                    }
                }
                if best.1 != usize::MAX {
                    self.facets[best.1].outside.push(q);
                }
            }
            for &nf in &new_facets {
                if !self.facets[nf].outside.is_empty() {
                    stack.push(nf);
                }
            }
        }

        self.finish()
    }

    fn finish(self) -> Result<Polytope> {
        let d = self.dim;
        let alive: Vec<usize> = (0..self.facets.len())
            .filter(|&i| self.facets[i].alive)
            .collect();
        let mut slot_of = vec![usize::MAX; self.facets.len()];
        for (k, &f) in alive.iter().enumerate() {
            slot_of[f] = k;
        }

        // merge adjacent coplanar simplicial facets (union-find)
        let mut parent: Vec<usize> = (0..alive.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let offset_tol = FACET_TOL * self.eps / VISIBILITY_TOL;
        for (k, &f) in alive.iter().enumerate() {
            let wf = &self.facets[f];
            for &nb in &wf.neighbors[..d] {
                let other = &self.facets[nb];
                if (wf.normal.dot(&other.normal) - 1.0).abs() < FACET_TOL
                    && (wf.offset - other.offset).abs() < offset_tol
                {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, slot_of[nb]));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }

        // compact vertex numbering in input order
        let mut used: BTreeSet<usize> = BTreeSet::new();
        for &f in &alive {
            used.extend(self.facets[f].verts[..d].iter().copied());
        }
        let mut remap = HashMap::with_capacity(used.len());
        let mut vertices = Vec::with_capacity(used.len());
        for (new, &old) in used.iter().enumerate() {
            remap.insert(old, new);
            vertices.push(self.points[old]);
        }

        let mut group_index: HashMap<usize, usize> = HashMap::new();
        let mut groups: Vec<(Vector, BTreeSet<usize>)> = Vec::new();
        let mut pieces = Vec::with_capacity(alive.len());
        for (k, &f) in alive.iter().enumerate() {
            let root = find(&mut parent, k);
            let gi = *group_index.entry(root).or_insert_with(|| {
                groups.push((Vector::zeros(d), BTreeSet::new()));
                groups.len() - 1
            });
            let wf = &self.facets[f];
            groups[gi].0 += wf.normal;
            let mut pv = [0u32; MAX_DIM];
            for j in 0..d {
                let v = remap[&wf.verts[j]];
                groups[gi].1.insert(v);
                pv[j] = v as u32;
            }
            pieces.push(Piece {
                vertices: pv,
                facet: gi as u32,
            });
        }
        let facets = groups
            .into_iter()
            .map(|(sum, verts)| {
                let normal = sum.normalized().expect("nonzero facet normal");
                let offset = verts
                    .iter()
                    .map(|&v| vertices[v].dot(&normal))
                    .fold(f64::NEG_INFINITY, f64::max);
                Facet {
                    normal,
                    offset,
                    vertices: verts.into_iter().collect(),
                }
            })
            .collect();

        Ok(Polytope {
            dim: d,
            interior: Vector::centroid(&vertices).unwrap(),
            vertices,
            facets,
            pieces,
        })
    }
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertex centroid, an interior point.
    pub fn interior_point(&self) -> Vector {
        self.interior
    }

    /// Simplices of the boundary triangulation as vertex index lists.
    pub fn boundary_simplices(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.pieces.iter().map(move |p| &p.vertices[..self.dim])
    }

    /// Sum of the cone volumes from the interior centroid over the boundary
    /// triangulation.
    pub fn volume(&self) -> f64 {
        let d = self.dim;
        let c = self.interior;
        let norm = linalg::factorial(d);
        let mut total = 0.0;
        let mut rows = [Vector::zeros(d); MAX_DIM];
        for piece in &self.pieces {
            for j in 0..d {
                rows[j] = self.vertices[piece.vertices[j] as usize] - c;
            }
            total += linalg::determinant(&rows[..d]).abs() / norm;
        }
        total
    }

    /// `(d-1)`-dimensional volume of each facet, indexed like [`Polytope::facets`].
    pub fn facet_areas(&self) -> Vec<f64> {
        let d = self.dim;
        let mut areas = vec![0.0; self.facets.len()];
        if d == 1 {
            areas.iter_mut().for_each(|a| *a = 1.0);
            return areas;
        }
        let mut verts = [Vector::zeros(d); MAX_DIM];
        for piece in &self.pieces {
            for j in 0..d {
                verts[j] = self.vertices[piece.vertices[j] as usize];
            }
            areas[piece.facet as usize] += linalg::simplex_volume(&verts[..d]);
        }
        areas
    }

    pub fn surface_area(&self) -> f64 {
        self.facet_areas().iter().sum()
    }

    pub fn contains(&self, y: &Vector, tol: f64) -> bool {
        self.facets
            .iter()
            .all(|f| y.dot(&f.normal) <= f.offset + tol)
    }

    /// Largest violated facet inequality, `max_f <y, n_f> - offset_f`; a
    /// lower bound on the distance from `y` to the polytope when positive.
    pub fn max_violation(&self, y: &Vector) -> f64 {
        self.facets
            .iter()
            .map(|f| y.dot(&f.normal) - f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Volume gained by adding the point `y`: the cones from `y` over the
    /// boundary pieces it sees.
    pub fn added_volume(&self, y: &Vector) -> f64 {
        let d = self.dim;
        let norm = linalg::factorial(d);
        let mut rows = [Vector::zeros(d); MAX_DIM];
        let mut total = 0.0;
        for piece in &self.pieces {
            let f = &self.facets[piece.facet as usize];
            if y.dot(&f.normal) <= f.offset {
                continue;
            }
            for j in 0..d {
                rows[j] = self.vertices[piece.vertices[j] as usize] - *y;
            }
            total += linalg::determinant(&rows[..d]).abs() / norm;
        }
        total
    }

    /// Largest `r` such that `r B^d` lies inside the polytope.
    pub fn min_facet_offset(&self) -> Result<f64> {
        let min = self
            .facets
            .iter()
            .map(|f| f.offset / f.normal.norm())
            .fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::OriginOutside { offset: min });
        }
        Ok(min)
    }

    /// Hull of the vertices together with extra points.
    pub fn extended(&self, extra: &[Vector]) -> Result<Polytope> {
        let mut pts = self.vertices.clone();
        pts.extend_from_slice(extra);
        convex_hull(&pts, self.dim)
    }

    /// Indices of the facets whose vertex lists contain all of `face`.
    pub fn facets_containing(&self, face: &[usize]) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| face.iter().all(|v| f.vertices.binary_search(v).is_ok()))
            .map(|(i, _)| i)
            .collect()
    }

    /// All `k`-faces, obtained top-down by intersecting the vertex sets of
    /// `(k+1)`-faces and keeping intersections of affine dimension `k`.
    pub fn faces(&self, k: usize) -> Result<FaceSet> {
        let d = self.dim;
        if k >= d {
            return Err(Error::InvalidInput(format!(
                "face dimension must be below {d}, got {k}"
            )));
        }
        if k == 0 {
            return Ok(FaceSet {
                k,
                faces: (0..self.vertices.len()).map(|i| vec![i]).collect(),
            });
        }
        let mut current: Vec<Vec<usize>> = self.facets.iter().map(|f| f.vertices.clone()).collect();
        current.sort();
        let mut level = d - 1;
        while level > k {
            let target = level - 1;
            let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
            for (fi, face) in current.iter().enumerate() {
                for &v in face {
                    by_vertex[v].push(fi);
                }
            }
            let mut next: BTreeSet<Vec<usize>> = BTreeSet::new();
            let mut seen_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
            for owners in &by_vertex {
                for (a_pos, &a) in owners.iter().enumerate() {
                    for &b in &owners[a_pos + 1..] {
                        if !seen_pairs.insert((a, b)) {
                            continue;
                        }
                        let common: Vec<usize> = current[a]
                            .iter()
                            .filter(|v| current[b].binary_search(v).is_ok())
                            .copied()
                            .collect();
                        if common.len() < target + 1 || next.contains(&common) {
                            continue;
                        }
                        let pts: Vec<Vector> = common.iter().map(|&v| self.vertices[v]).collect();
                        if linalg::affine_dimension(&pts, FACET_TOL) == target {
                            next.insert(common);
                        }
                    }
                }
            }
            current = next.into_iter().collect();
            level = target;
        }
        Ok(FaceSet { k, faces: current })
    }

    /// Rebuilds a polytope from vertices, checking optional facets against
    /// the recomputed hull.
    pub fn from_parts(dim: usize, vertices: &[Vector], facets: Option<&[Facet]>) -> Result<Polytope> {
        let hull = convex_hull(vertices, dim)?;
        if let Some(given) = facets {
            for (i, f) in given.iter().enumerate() {
                let n = f.normal.norm();
                if f.normal.dim() != dim || n == 0.0 {
                    return Err(Error::InvalidInput(format!("facet {i} has a bad normal")));
                }
                for v in vertices {
                    if v.dot(&f.normal) / n > f.offset / n + FACET_TOL {
                        return Err(Error::InvalidInput(format!(
                            "facet {i} is not a supporting hyperplane of the vertices"
                        )));
                    }
                }
            }
        }
        Ok(hull)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_body, BodySpec, RngStream};
    use approx::assert_relative_eq;

    pub(crate) fn unit_cube(d: usize) -> Vec<Vector> {
        (0..1usize << d)
            .map(|mask| Vector::from_fn(d, |i| ((mask >> i) & 1) as f64))
            .collect()
    }

    fn standard_simplex(d: usize) -> Vec<Vector> {
        let mut pts = vec![Vector::zeros(d)];
        pts.extend((0..d).map(|i| Vector::unit(d, i)));
        pts
    }

    #[test]
    fn square_hull() {
        let p = convex_hull(&unit_cube(2), 2).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert_relative_eq!(p.volume(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cube_hull_merges_coplanar_pieces() {
        let p = convex_hull(&unit_cube(3), 3).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(p.facets().len(), 6);
        assert!(p.facets().iter().all(|f| f.vertices.len() == 4));
        assert_relative_eq!(p.volume(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.surface_area(), 6.0, epsilon = 1e-13);
        assert_eq!(p.faces(1).unwrap().faces.len(), 12);
        assert_eq!(p.faces(0).unwrap().faces.len(), 8);
    }

    #[test]
    fn simplex_hull_and_faces() {
        for d in 2..=5 {
            let p = convex_hull(&standard_simplex(d), d).unwrap();
            assert_eq!(p.facets().len(), d + 1);
            assert_relative_eq!(p.volume(), 1.0 / linalg::factorial(d), epsilon = 1e-14);
            for k in 0..d {
                let faces = p.faces(k).unwrap();
                assert_eq!(faces.faces.len() as f64, linalg::binomial(d + 1, k + 1));
            }
        }
    }

    #[test]
    fn interval_hull() {
        let pts = [Vector::new(&[0.3]), Vector::new(&[-0.7]), Vector::new(&[0.1])];
        let p = convex_hull(&pts, 1).unwrap();
        assert_relative_eq!(p.volume(), 1.0);
        assert_eq!(p.vertices().len(), 2);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let flat = [
            Vector::new(&[0.0, 0.0, 0.0]),
            Vector::new(&[1.0, 0.0, 0.0]),
            Vector::new(&[0.0, 1.0, 0.0]),
            Vector::new(&[1.0, 1.0, 0.0]),
        ];
        assert!(matches!(convex_hull(&flat, 3), Err(Error::DegenerateInput(_))));
        assert!(matches!(
            convex_hull(&flat[..3], 3),
            Err(Error::DegenerateInput(_))
        ));
        let collinear = [
            Vector::new(&[0.0, 0.0]),
            Vector::new(&[1.0, 1.0]),
            Vector::new(&[2.0, 2.0]),
        ];
        assert!(convex_hull(&collinear, 2).is_err());
    }

    #[test]
    fn centered_cube_inradius() {
        let pts: Vec<Vector> = unit_cube(3).iter().map(|v| *v * 2.0 - Vector::new(&[1.0; 3])).collect();
        let p = convex_hull(&pts, 3).unwrap();
        assert_relative_eq!(p.min_facet_offset().unwrap(), 1.0, epsilon = 1e-14);
        let shifted: Vec<Vector> = unit_cube(3).iter().map(|v| *v + Vector::new(&[0.5; 3])).collect();
        assert!(matches!(
            convex_hull(&shifted, 3).unwrap().min_facet_offset(),
            Err(Error::OriginOutside { .. })
        ));
    }

    #[test]
    fn regular_simplex_inradius_matches_plane_distances() {
        // regular simplex centred at the origin: e_i - centroid in R^{d+1}, expressed in R^d
        let d = 3;
        let raw: Vec<Vector> = (0..=d)
            .map(|i| Vector::from_fn(d + 1, |j| if i == j { 1.0 } else { 0.0 } - 1.0 / (d + 1) as f64))
            .collect();
        let ones = Vector::new(&vec![1.0; d + 1]).normalized().unwrap();
        let basis = linalg::complement_basis(&[ones], d + 1);
        let pts: Vec<Vector> = raw
            .iter()
            .map(|p| Vector::from_fn(d, |j| p.dot(&basis[j])))
            .collect();
        let p = convex_hull(&pts, d).unwrap();
        // brute force: distance from o to the plane through each triple
        let mut brute = f64::INFINITY;
        for skip in 0..=d {
            let face: Vec<Vector> = (0..=d).filter(|&i| i != skip).map(|i| pts[i]).collect();
            let e1 = face[1] - face[0];
            let e2 = face[2] - face[0];
            let n = Vector::new(&[
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ])
            .normalized()
            .unwrap();
            brute = brute.min(face[0].dot(&n).abs());
        }
        assert_relative_eq!(p.min_facet_offset().unwrap(), brute, epsilon = 1e-12);
    }

    #[test]
    fn ball_hull_contains_all_points() {
        let mut rng = RngStream::new(3, 0).rng();
        let pts = sample_body(&BodySpec::Ball { dim: 3 }, 1000, &mut rng);
        let p = convex_hull(&pts, 3).unwrap();
        for q in &pts {
            assert!(p.contains(q, FACET_TOL));
        }
        for f in p.facets() {
            for &v in &f.vertices {
                assert!((p.vertices()[v].dot(&f.normal) - f.offset).abs() < FACET_TOL);
            }
        }
        let r = p.min_facet_offset().unwrap();
        assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn random_hull_satisfies_euler() {
        let mut rng = RngStream::new(4, 0).rng();
        let pts = sample_body(&BodySpec::Ball { dim: 3 }, 300, &mut rng);
        let p = convex_hull(&pts, 3).unwrap();
        let v = p.faces(0).unwrap().faces.len() as i64;
        let e = p.faces(1).unwrap().faces.len() as i64;
        let f = p.faces(2).unwrap().faces.len() as i64;
        assert_eq!(v - e + f, 2);
        // simplicial: every edge lies in exactly two triangles
        assert_eq!(2 * e, 3 * f);
    }

    #[test]
    fn added_volume_matches_rebuilt_hull() {
        let mut rng = RngStream::new(8, 0).rng();
        let pts = sample_body(&BodySpec::Ball { dim: 3 }, 200, &mut rng);
        let p = convex_hull(&pts, 3).unwrap();
        let y = Vector::new(&[0.9, 0.3, -0.2]);
        let rebuilt = p.extended(&[y]).unwrap();
        assert_relative_eq!(
            p.volume() + p.added_volume(&y),
            rebuilt.volume(),
            epsilon = 1e-12
        );
        assert_eq!(p.added_volume(&Vector::zeros(3)), 0.0);
    }
}
