use std::f64::consts::PI;

use rand::Rng;
use stochgeo::experiments::{expectation_experiment, variance_experiment, ExperimentConfig, Params};
use stochgeo::geometry::Vector;
use stochgeo::hull::convex_hull;
use stochgeo::intrinsic::{ball_intrinsic, exact_intrinsic, kubota_intrinsic};
use stochgeo::sampling::{sample_body, uniform_sphere, BodySpec, RngStream};

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_params(&Params::parse(text).unwrap()).unwrap()
}

#[test]
fn large_planar_hull_area() {
    let pts = sample_body(&BodySpec::ball(2).unwrap(), 10_000, &mut RngStream::new(1, 0).rng());
    let p = convex_hull(&pts, 2).unwrap();
    // hit-fraction estimate of the hull area in [-1, 1]^2
    let mut rng = RngStream::new(1, 1).rng();
    let m = 200_000;
    let hits = (0..m)
        .filter(|_| p.contains(&Vector::new(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]), 0.0))
        .count();
    let frac = hits as f64 / m as f64;
    let est = 4.0 * frac;
    let se = 4.0 * (frac * (1.0 - frac) / m as f64).sqrt();
    assert!((p.volume() - est).abs() < 4.0 * se, "{} vs {est} ± {se}", p.volume());
    assert!((p.volume() - PI).abs() < 0.02 * PI);
    assert!(p.volume() < PI);
}

#[test]
fn kubota_and_external_angles_agree_on_random_hulls() {
    for d in [2usize, 3] {
        for (k, n) in [8usize, 40, 200].into_iter().enumerate() {
            let pts = sample_body(&BodySpec::ball(d).unwrap(), n, &mut RngStream::new(2, (d * 10 + k) as u64).rng());
            let p = convex_hull(&pts, d).unwrap();
            let mut rng = RngStream::new(3, (d * 10 + k) as u64).rng();
            for s in 1..=d {
                let e = exact_intrinsic(&p, s, 20_000, &mut rng).unwrap();
                let q = kubota_intrinsic(p.vertices(), s, 20_000, &mut rng).unwrap();
                let sigma = e.std_error.hypot(q.std_error);
                let tol = (3.0 * sigma).max(1e-9 * e.value);
                assert!((e.value - q.value).abs() <= tol, "d={d} n={n} s={s}: {} vs {} ± {sigma}", e.value, q.value);
            }
        }
    }
}

#[test]
fn inscribed_polytopes_approach_the_ball() {
    let d = 3;
    let target = ball_intrinsic(d, 1);
    assert!((target - 4.0).abs() < 1e-12);
    let mut errors = Vec::new();
    for (k, n) in [50usize, 500, 5000].into_iter().enumerate() {
        let pts: Vec<Vector> = {
            let mut rng = RngStream::new(4, k as u64).rng();
            (0..n).map(|_| uniform_sphere(d, &mut rng)).collect()
        };
        let p = convex_hull(&pts, d).unwrap();
        let est = kubota_intrinsic(p.vertices(), 1, 4000, &mut RngStream::new(5, 0).rng()).unwrap();
        assert!(est.value < target + 3.0 * est.std_error);
        errors.push(target - est.value);
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] < 0.01 * target);
}

#[test]
fn mean_width_gap_exponent_in_space() {
    let t = expectation_experiment(&cfg("dim = 3\ns = 1\nn = 64..4096x2\nreps = 100\nseed = 8")).unwrap();
    let slope = t.fit.unwrap().slope;
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

// Fixed directions decorrelate once n^(-1/3) drops below their spacing,
// adding a n^(-4/3)/dirs term; the budget must dominate n^(1/3).
#[test]
fn exact_and_kubota_evaluators_give_the_same_exponent() {
    let base = "dim = 2\ns = 1\nn = 64..2048x2\nreps = 300\nseed = 11";
    let exact = variance_experiment(&cfg(base)).unwrap().fit.unwrap();
    let kubota = variance_experiment(&cfg(&format!("{base}\nevaluator = kubota\ndirs = 1024"))).unwrap().fit.unwrap();
    let combined = exact.stderr.hypot(kubota.stderr);
    assert!(
        (exact.slope - kubota.slope).abs() <= combined,
        "exact {} ± {}, kubota {} ± {}",
        exact.slope,
        exact.stderr,
        kubota.slope,
        kubota.stderr
    );
}
