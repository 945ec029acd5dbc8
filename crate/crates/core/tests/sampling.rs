use std::f64::consts::PI;

use rand::Rng;
use stochgeo::caps::adaptive_simpson;
use stochgeo::geometry::{angle_to_subspace, linalg::ball_volume, Frame, Vector};
use stochgeo::sampling::{haar_subspace, uniform_ball, uniform_body, uniform_sphere, BodySpec, RngStream};

const N: usize = 100_000;

/// Kolmogorov distance between a sample and a continuous CDF.
fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

// asymptotic 1% critical value of the Kolmogorov distribution
const KS_1PCT: f64 = 1.628;

fn within_binomial(hits: usize, n: usize, p: f64, sigmas: f64) -> bool {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= sigmas * se
}

#[test]
fn one_dimensional_ball_is_uniform_on_the_interval() {
    let mut rng = RngStream::new(1, 0).rng();
    let xs: Vec<f64> = (0..N).map(|_| uniform_ball(1, &mut rng)[0]).collect();
    let d = ks_one_sample(xs, |x| (x + 1.0) / 2.0);
    assert!(d < KS_1PCT / (N as f64).sqrt(), "KS distance {d}");
}

#[test]
fn radial_law_of_the_ball() {
    for d in 2..=5 {
        let mut rng = RngStream::new(2, d as u64).rng();
        let hits = (0..N).filter(|_| uniform_ball(d, &mut rng).norm() <= 0.5).count();
        assert!(within_binomial(hits, N, 0.5f64.powi(d as i32), 4.0), "d={d}: {hits}");
    }
}

#[test]
fn ball_mean_is_the_origin() {
    for d in [2usize, 3, 5] {
        // marginal density of one coordinate is proportional to (1-x^2)^((d-1)/2)
        let w = |x: f64| (1.0 - x * x).max(0.0).powf((d as f64 - 1.0) / 2.0);
        let var = adaptive_simpson(&|x| x * x * w(x), -1.0, 1.0, 1e-12) / adaptive_simpson(&w, -1.0, 1.0, 1e-12);
        assert!((var - 1.0 / (d as f64 + 2.0)).abs() < 1e-9);

        let mut rng = RngStream::new(3, d as u64).rng();
        let mut sum = Vector::zeros(d);
        for _ in 0..N {
            sum = sum.axpy(1.0, &uniform_ball(d, &mut rng));
        }
        let tol = 4.0 * (var / N as f64).sqrt();
        for i in 0..d {
            assert!((sum[i] / N as f64).abs() < tol, "d={d} coordinate {i}");
        }
    }
}

#[test]
fn ellipsoid_sub_ellipsoid_fraction() {
    let e = BodySpec::ellipsoid(&[2.0, 1.0]).unwrap();
    let inner = BodySpec::ellipsoid(&[1.0, 0.5]).unwrap();
    let mut rng = RngStream::new(4, 0).rng();
    let hits = (0..N).filter(|_| inner.contains(&uniform_body(&e, &mut rng))).count();
    assert!(within_binomial(hits, N, 0.25, 4.0), "{hits}");
}

#[test]
fn ellipsoid_volume_by_hit_fraction() {
    let e = BodySpec::ellipsoid(&[2.0, 1.0, 1.0]).unwrap();
    let mut rng = RngStream::new(5, 0).rng();
    let box_volume = 4.0 * 2.0 * 2.0;
    let hits = (0..N)
        .filter(|_| {
            let p = Vector::new(&[
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            e.contains(&p)
        })
        .count();
    let est = box_volume * hits as f64 / N as f64;
    let exact = ball_volume(3) * 2.0;
    assert!((est - exact).abs() < 0.01 * exact, "{est} vs {exact}");
    assert!((e.volume() - exact).abs() < 1e-12);
    // samples stay inside
    assert!((0..1000).all(|_| e.contains(&uniform_body(&e, &mut rng))));
}

#[test]
fn sphere_is_centered_and_has_the_right_caps() {
    let mut rng = RngStream::new(6, 0).rng();
    let xs: Vec<Vector> = (0..N).map(|_| uniform_sphere(3, &mut rng)).collect();
    assert!(xs.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
    let mean: f64 = xs.iter().map(|x| x[0]).sum::<f64>() / N as f64;
    assert!(mean.abs() < 4.0 * (1.0 / (3.0 * N as f64)).sqrt());

    let alpha = PI / 6.0;
    // normalized area of the polar cap: int_0^alpha sin / 2
    let p = adaptive_simpson(&f64::sin, 0.0, alpha, 1e-12) / 2.0;
    assert!((p - 0.066_987_298_107_780_68).abs() < 1e-12);
    let hits = xs.iter().filter(|x| x[0] >= alpha.cos()).count();
    assert!(within_binomial(hits, N, p, 4.0), "{hits}");
}

#[test]
fn hyperplanes_near_a_direction() {
    // A is a plane in R^3; angle(z, A) <= alpha iff the unit normal u of A has
    // |<u, z>| <= sin(alpha), and <u, z> is uniform on [-1, 1]
    let alpha = 0.3f64;
    let p = adaptive_simpson(&|_| 0.5, -alpha.sin(), alpha.sin(), 1e-12);
    assert!((p - alpha.sin()).abs() < 1e-12);
    let z = Vector::unit(3, 0);
    let mut rng = RngStream::new(7, 0).rng();
    let hits = (0..N)
        .filter(|_| angle_to_subspace(&z, &haar_subspace(3, 2, &mut rng).unwrap()) <= alpha)
        .count();
    assert!(within_binomial(hits, N, p, 4.0), "{hits} vs {}", p * N as f64);
}

#[test]
fn distinct_streams_are_uncorrelated() {
    for (a, b) in [(0u64, 1u64), (1, 2), (17, 18)] {
        let mut ra = RngStream::new(9, a).rng();
        let mut rb = RngStream::new(9, b).rng();
        let xs: Vec<(f64, f64)> = (0..N).map(|_| (ra.random::<f64>(), rb.random::<f64>())).collect();
        let (mx, my) = xs.iter().fold((0.0, 0.0), |(p, q), (x, y)| (p + x, q + y));
        let (mx, my) = (mx / N as f64, my / N as f64);
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in &xs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        let r = sxy / (sxx * syy).sqrt();
        assert!(r.abs() < 4.0 / (N as f64).sqrt(), "streams {a},{b}: r = {r}");
    }
    let mut k1 = RngStream::keyed(9, &[1, 2]).rng();
    let mut k2 = RngStream::keyed(9, &[2, 1]).rng();
    assert_ne!(k1.random::<u64>(), k2.random::<u64>());
}

fn rotation(d: usize, seed: u64) -> Frame {
    haar_subspace(d, d, &mut RngStream::new(seed, 99).rng()).unwrap()
}

fn rotate(r: &Frame, v: &Vector) -> Vector {
    let mut out = Vector::zeros(v.dim());
    for (i, b) in r.basis().iter().enumerate() {
        out = out.axpy(v[i], b);
    }
    out
}

#[test]
fn haar_subspaces_are_rotation_invariant() {
    let n = 20_000;
    for (d, s) in [(3usize, 1usize), (3, 2), (4, 2)] {
        let r = rotation(d, d as u64 * 10 + s as u64);
        let z = uniform_sphere(d, &mut RngStream::new(10, 0).rng());
        let rz = rotate(&r, &z);
        let mut a = RngStream::new(11, (d * 10 + s) as u64).rng();
        let mut b = RngStream::new(12, (d * 10 + s) as u64).rng();
        let first: Vec<f64> = (0..n).map(|_| angle_to_subspace(&z, &haar_subspace(d, s, &mut a).unwrap())).collect();
        let second: Vec<f64> = (0..n).map(|_| angle_to_subspace(&rz, &haar_subspace(d, s, &mut b).unwrap())).collect();
        let stat = ks_two_sample(first, second);
        let crit = KS_1PCT * (2.0 / n as f64).sqrt();
        assert!(stat < crit, "d={d} s={s}: {stat} >= {crit}");
    }
}

#[test]
fn rotating_both_arguments_keeps_the_angle() {
    let mut rng = RngStream::new(13, 0).rng();
    for d in 2..=5 {
        let r = rotation(d, d as u64);
        for s in 1..d {
            let a = haar_subspace(d, s, &mut rng).unwrap();
            let z = uniform_sphere(d, &mut rng);
            let ra = a.rotated(|v| rotate(&r, v)).unwrap();
            let before = angle_to_subspace(&z, &a);
            let after = angle_to_subspace(&rotate(&r, &z), &ra);
            assert!((before - after).abs() < 1e-10, "d={d} s={s}");
        }
    }
}
