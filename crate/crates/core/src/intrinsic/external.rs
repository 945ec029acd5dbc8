use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{IntrinsicEstimate, Method};
use crate::error::{Error, Result};
use crate::geometry::{linalg, Vector};
use crate::hull::{convex_hull, Polytope};

/// `s`-dimensional volume of the face spanned by the given vertices.
pub fn face_volume(p: &Polytope, face: &[usize], s: usize) -> Result<f64> {
    let pts: Vec<Vector> = face.iter().map(|&v| p.vertices()[v]).collect();
    if s == 0 {
        return Ok(1.0);
    }
    if pts.len() == s + 1 {
        return Ok(linalg::simplex_volume(&pts));
    }
    // coordinates in an orthonormal basis of the affine hull
    let base = pts[0];
    let mut basis: Vec<Vector> = Vec::with_capacity(s);
    for q in &pts[1..] {
        let mut r = *q - base;
        for _ in 0..2 {
            for b in &basis {
                r = r.axpy(-r.dot(b), b);
            }
        }
        if let Some(u) = r.normalized() {
            if r.norm() > 1e-9 * (*q - base).norm() {
                basis.push(u);
                if basis.len() == s {
                    break;
                }
            }
        }
    }
    if basis.len() < s {
        return Err(Error::DegenerateInput(format!(
            "face does not span {s} dimensions"
        )));
    }
    let local: Vec<Vector> = pts
        .iter()
        .map(|q| Vector::from_fn(s, |j| (*q - base).dot(&basis[j])))
        .collect();
    Ok(convex_hull(&local, s)?.volume())
}

/// Normalized external angle of `p` at `face` (an `s`-face), with the
/// variance of the estimate.
///
/// Closed forms are used when the normal space has dimension 1 (angle 1/2)
/// or 2 (angle between the two facet normals over `2 pi`); otherwise the
/// angle is the fraction of `samples` Gaussian directions in the orthogonal
/// complement of the face that lie in its normal cone.
pub fn external_angle<R: Rng + ?Sized>(
    p: &Polytope,
    face: &[usize],
    s: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let d = p.dim();
    if s >= d {
        return Ok((1.0, 0.0));
    }
    let containing = p.facets_containing(face);
    match d - s {
        1 => return Ok((0.5, 0.0)),
        2 if containing.len() == 2 => {
            let n1 = p.facets()[containing[0]].normal;
            let n2 = p.facets()[containing[1]].normal;
            let theta = n1.dot(&n2).clamp(-1.0, 1.0).acos();
            return Ok((theta / (2.0 * PI), 0.0));
        }
        _ => {}
    }
    if samples == 0 {
        return Err(Error::InvalidInput(
            "external angles in codimension >= 3 need angle samples".into(),
        ));
    }

    let verts = p.vertices();
    let base = verts[face[0]];
    let edges: Vec<Vector> = face[1..].iter().map(|&v| verts[v] - base).collect();
    let span = linalg::orthonormalize(&edges, 1e-9)
        .filter(|b| b.len() == s)
        .ok_or_else(|| Error::DegenerateInput("face is not affinely independent".into()))?;
    let normal_space = linalg::complement_basis(&span, d);

    // vertices adjacent to the face through its facets generate the tangent cone
    let mut neighbours: Vec<usize> = containing
        .iter()
        .flat_map(|&f| p.facets()[f].vertices.iter().copied())
        .filter(|v| face.binary_search(v).is_err())
        .collect();
    neighbours.sort_unstable();
    neighbours.dedup();
    let directions: Vec<Vector> = neighbours
        .iter()
        .map(|&v| verts[v] - base)
        .collect();

    let mut hits = 0usize;
    for _ in 0..samples {
        let u = normal_space
            .iter()
            .fold(Vector::zeros(d), |acc, b| acc.axpy(rng.sample(StandardNormal), b));
        if directions.iter().all(|e| u.dot(e) <= 0.0) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok((frac, frac * (1.0 - frac) / samples as f64))
}

/// `V_s(P) = sum_F lambda_s(F) gamma(F, P)` over the `s`-faces of `P`.
///
/// `s = d` gives the volume and `s = 0` gives 1.
pub fn exact_intrinsic<R: Rng + ?Sized>(
    p: &Polytope,
    s: usize,
    angle_samples: usize,
    rng: &mut R,
) -> Result<IntrinsicEstimate> {
    let d = p.dim();
    if s > d {
        return Err(Error::InvalidInput(format!(
            "intrinsic index must be at most {d}, got {s}"
        )));
    }
    let estimate = |value: f64, var: f64| IntrinsicEstimate {
        s,
        value,
        std_error: var.sqrt(),
        method: Method::ExternalAngle,
    };
    if s == d {
        return Ok(estimate(p.volume(), 0.0));
    }
    if s == 0 {
        return Ok(estimate(1.0, 0.0));
    }
    if s == d - 1 {
        return Ok(estimate(0.5 * p.surface_area(), 0.0));
    }
    let faces = p.faces(s)?;
    let mut value = 0.0;
    let mut var = 0.0;
    for face in &faces.faces {
        let vol = face_volume(p, face, s)?;
        let (gamma, gamma_var) = external_angle(p, face, s, angle_samples, rng)?;
        value += vol * gamma;
        var += vol * vol * gamma_var;
    }
    Ok(estimate(value, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use approx::assert_relative_eq;

    fn cube(d: usize) -> Polytope {
        let pts: Vec<Vector> = (0..1usize << d)
            .map(|m| Vector::from_fn(d, |i| ((m >> i) & 1) as f64))
            .collect();
        convex_hull(&pts, d).unwrap()
    }

    #[test]
    fn unit_cube_intrinsic_volumes() {
        let c = cube(3);
        let mut rng = RngStream::new(0, 0).rng();
        // Steiner polynomial of the unit cube: 1 + 6 l + 3 pi l^2 + 4/3 pi l^3
        assert_relative_eq!(exact_intrinsic(&c, 3, 0, &mut rng).unwrap().value, 1.0, epsilon = 1e-14);
        assert_relative_eq!(exact_intrinsic(&c, 2, 0, &mut rng).unwrap().value, 3.0, epsilon = 1e-13);
        assert_relative_eq!(exact_intrinsic(&c, 1, 0, &mut rng).unwrap().value, 3.0, epsilon = 1e-13);
        assert_eq!(exact_intrinsic(&c, 0, 0, &mut rng).unwrap().value, 1.0);
    }

    #[test]
    fn polygon_v1_is_semiperimeter() {
        let pts = [
            Vector::new(&[0.0, 0.0]),
            Vector::new(&[3.0, 0.0]),
            Vector::new(&[0.0, 4.0]),
        ];
        let p = convex_hull(&pts, 2).unwrap();
        let mut rng = RngStream::new(0, 0).rng();
        assert_relative_eq!(exact_intrinsic(&p, 1, 0, &mut rng).unwrap().value, 6.0, epsilon = 1e-13);
    }

    #[test]
    fn tesseract_monte_carlo_angles() {
        // unit 4-cube: V_1 = 4 (32 edges x length 1 x angle 1/8)
        let c = cube(4);
        let mut rng = RngStream::new(7, 0).rng();
        let est = exact_intrinsic(&c, 1, 20_000, &mut rng).unwrap();
        assert!((est.value - 4.0).abs() < 4.0 * est.std_error, "{est:?}");
        // V_2 = 6 (24 squares x area 1 x angle 1/4), closed form
        let est = exact_intrinsic(&c, 2, 0, &mut rng).unwrap();
        assert_relative_eq!(est.value, 6.0, epsilon = 1e-12);
    }
}
