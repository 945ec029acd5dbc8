use proptest::prelude::*;
use rand::Rng;

use stochgeo::caps::{cap_height_for_volume, cap_volume};
use stochgeo::experiments::config::format_usize_grid;
use stochgeo::experiments::parse_usize_grid;
use stochgeo::geometry::linalg::ball_volume;
use stochgeo::geometry::{cap_from_direction, Vector};
use stochgeo::hull::convex_hull;
use stochgeo::intrinsic::{exact_intrinsic, projection_volume};
use stochgeo::sampling::{haar_subspace, sample_body, uniform_ball, uniform_sphere, BodySpec, RngStream};
use stochgeo::stats::fit_exponent;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Uniform unit vector orthogonal to `x`.
fn tangent<R: Rng>(x: &Vector, rng: &mut R) -> Vector {
    loop {
        let u = uniform_sphere(x.dim(), rng);
        if let Some(v) = u.axpy(-u.dot(x), x).normalized() {
            return v;
        }
    }
}

fn ball_points(d: usize, n: usize, seed: u64) -> Vec<Vector> {
    sample_body(&BodySpec::ball(d).unwrap(), n, &mut RngStream::new(seed, 0).rng())
}

fn sorted_coords(pts: &[Vector]) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = pts.iter().map(|p| p.as_slice().to_vec()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn cap_base_satisfies_pythagoras(d in 2usize..=6, seed: u64, t in 1e-6f64..0.999_999) {
        let x = uniform_sphere(d, &mut RngStream::new(seed, 0).rng());
        let c = cap_from_direction(&x, t).unwrap();
        prop_assert!((c.base_radius.powi(2) + (1.0 - t).powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_sections_and_neighbourhoods(d in 2usize..=5, seed: u64, t in 1e-5f64..0.5) {
        let mut rng = RngStream::new(seed, 1).rng();
        let x = uniform_sphere(d, &mut rng);
        let center = x * (1.0 - t);
        let cap = cap_from_direction(&x, t).unwrap().cap;
        for _ in 0..50 {
            // disk of radius sqrt(t) in the cutting plane lies in the ball
            let r = t.sqrt() * rng.random::<f64>();
            let y = center.axpy(r, &tangent(&x, &mut rng));
            prop_assert!(y.norm() <= 1.0 + 1e-12);
            prop_assert!((y.dot(&x) - (1.0 - t)).abs() < 1e-12);
            // the whole section lies within sqrt(2t) of its centre
            let r = c_radius(t) * rng.random::<f64>();
            let y = center.axpy(r, &tangent(&x, &mut rng));
            prop_assert!(y.distance(&center) <= (2.0 * t).sqrt() + 1e-12);
            // cap points lie within 2 sqrt(t) of x
            let z = uniform_ball(d, &mut rng);
            if cap.contains(&z) {
                prop_assert!(z.distance(&x) <= 2.0 * t.sqrt() + 1e-12);
            }
            let depth = t * rng.random::<f64>();
            let w = (x * (1.0 - depth)).axpy(c_radius(depth) * rng.random::<f64>(), &tangent(&x, &mut rng));
            prop_assert!(cap.contains(&w) || w.norm() > 1.0 - 1e-12);
            prop_assert!(w.distance(&x) <= 2.0 * t.sqrt() + 1e-12);
        }
    }

    #[test]
    fn cap_volume_round_trips(d in 2usize..=6, frac in 1e-8f64..0.5) {
        let v = frac * ball_volume(d);
        let h = cap_height_for_volume(d, v).unwrap();
        prop_assert!((cap_volume(d, h) - v).abs() <= 1e-10 * v);
        prop_assert!(cap_volume(d, h * 1.001) > v);
    }

    #[test]
    fn hull_is_idempotent(d in 2usize..=4, n in 6usize..60, seed: u64) {
        let p = convex_hull(&ball_points(d, n, seed), d).unwrap();
        let q = convex_hull(p.vertices(), d).unwrap();
        prop_assert_eq!(sorted_coords(p.vertices()), sorted_coords(q.vertices()));
        prop_assert!((p.volume() - q.volume()).abs() <= 1e-12 * p.volume());
    }

    #[test]
    fn adding_points_never_shrinks_the_hull(d in 2usize..=4, n in 6usize..40, seed: u64) {
        let mut rng = RngStream::new(seed, 2).rng();
        let mut pts = ball_points(d, n, seed);
        let mut volume = convex_hull(&pts, d).unwrap().volume();
        for _ in 0..5 {
            pts.push(Vector::from_fn(d, |_| rng.random_range(-1.5..1.5)));
            let next = convex_hull(&pts, d).unwrap().volume();
            prop_assert!(next >= volume - 1e-12 * volume);
            volume = next;
        }
    }

    #[test]
    fn projections_of_ball_points_fit_in_the_small_ball(d in 3usize..=5, n in 10usize..80, seed: u64, s_off in 0usize..3) {
        let s = 2 + s_off % (d - 1);
        let pts = ball_points(d, n, seed);
        let frame = haar_subspace(d, s, &mut RngStream::new(seed, 3).rng()).unwrap();
        prop_assert!(projection_volume(&pts, &frame).unwrap() <= ball_volume(s));
    }

    #[test]
    fn intrinsic_volumes_are_homogeneous(d in 2usize..=3, n in 6usize..30, seed: u64) {
        let pts = ball_points(d, n, seed);
        let doubled: Vec<Vector> = pts.iter().map(|p| *p * 2.0).collect();
        let p = convex_hull(&pts, d).unwrap();
        let q = convex_hull(&doubled, d).unwrap();
        for s in 1..=d {
            let a = exact_intrinsic(&p, s, 2000, &mut RngStream::new(seed, 4).rng()).unwrap();
            let b = exact_intrinsic(&q, s, 2000, &mut RngStream::new(seed, 4).rng()).unwrap();
            let scale = 2f64.powi(s as i32);
            let sigma = (scale * a.std_error).hypot(b.std_error);
            prop_assert!((b.value - scale * a.value).abs() <= 3.0 * sigma + 1e-10 * b.value, "s={}", s);
        }
    }

    #[test]
    fn intrinsic_volumes_grow_along_nested_hulls(d in 2usize..=3, n in 6usize..30, seed: u64) {
        let pts = ball_points(d, n + 20, seed);
        let inner = convex_hull(&pts[..n], d).unwrap();
        let outer = convex_hull(&pts, d).unwrap();
        for s in 1..=d {
            let a = exact_intrinsic(&inner, s, 2000, &mut RngStream::new(seed, 5).rng()).unwrap();
            let b = exact_intrinsic(&outer, s, 2000, &mut RngStream::new(seed, 6).rng()).unwrap();
            prop_assert!(a.value <= b.value + 3.0 * a.std_error.hypot(b.std_error) + 1e-12, "s={}", s);
        }
    }

    #[test]
    fn geometric_grids_round_trip(a in 1usize..200, r in 2usize..5, k in 0u32..8, extra in 0usize..3) {
        let top = a * r.pow(k);
        let hi = top + extra.min(top * (r - 1) - 1);
        let grid = parse_usize_grid(&format!("{a}..{hi}x{r}")).unwrap();
        prop_assert_eq!(grid.len(), k as usize + 1);
        prop_assert!(grid.windows(2).all(|w| w[1] == w[0] * r));
        prop_assert_eq!(*grid.last().unwrap(), top);
        prop_assert_eq!(parse_usize_grid(&format_usize_grid(&grid)).unwrap(), grid);
    }

    #[test]
    fn power_laws_are_recovered(k in -3.0f64..3.0, c in 1e-3f64..1e3, lo in 1.0f64..100.0) {
        let rows: Vec<(f64, f64, f64)> = (0..6).map(|i| {
            let x = lo * 2f64.powi(i);
            let y = c * x.powf(k);
            (x, y, 0.01 * y)
        }).collect();
        let fit = fit_exponent(&rows).unwrap();
        prop_assert!((fit.slope - k).abs() < 1e-9);
        let scaled: Vec<_> = rows.iter().map(|(x, y, s)| (*x, 7.0 * y, 7.0 * s)).collect();
        prop_assert!((fit_exponent(&scaled).unwrap().slope - k).abs() < 1e-9);
    }
}

fn c_radius(t: f64) -> f64 {
    (t * (2.0 - t)).sqrt()
}
