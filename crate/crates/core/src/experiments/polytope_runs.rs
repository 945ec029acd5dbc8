use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;

use super::{replicate, Cell, Evaluator, ExperimentConfig, ExperimentTable};
use crate::caps::wet_part;
use crate::error::{Error, Result};
use crate::geometry::{linalg, Frame, Vector};
use crate::hull::{convex_hull, Polytope};
use crate::intrinsic::{
    ball_intrinsic, ellipsoid_intrinsic, exact_intrinsic, kubota_intrinsic, kubota_with_frames,
};
use crate::sampling::{haar_subspace, sample_body, uniform_body, BodySpec, RngStream};
use crate::stats::{fit_exponent, jackknife_variance_of_variance, mean, sample_variance};

// stream tags; the sampling tag is shared so that experiments on the same
// seed see the same point sets
const TAG_POINTS: u64 = 1;
const TAG_FRAMES: u64 = 2;
const TAG_TRAJECTORY: u64 = 3;
const TAG_REFERENCE: u64 = 4;
const REFERENCE_SEED: u64 = 0x0005_EED0_F2EF;

/// `V_s` of sampled polytopes at one grid level.
struct LevelEvaluator {
    s: usize,
    evaluator: Evaluator,
    angle_samples: usize,
    frames: Option<Vec<Frame>>,
}

impl LevelEvaluator {
    fn new(cfg: &ExperimentConfig, level: usize) -> Result<Self> {
        let d = cfg.body.dim();
        let frames = match cfg.evaluator {
            Evaluator::Kubota { dirs } if cfg.common_frames && cfg.s < d => {
                let mut rng = RngStream::keyed(cfg.seed, &[TAG_FRAMES, level as u64]).rng();
                Some(
                    (0..dirs)
                        .map(|_| haar_subspace(d, cfg.s, &mut rng))
                        .collect::<Result<_>>()?,
                )
            }
            _ => None,
        };
        Ok(LevelEvaluator {
            s: cfg.s,
            evaluator: cfg.evaluator,
            angle_samples: cfg.angle_samples,
            frames,
        })
    }

    fn value<R: Rng + ?Sized>(&self, p: &Polytope, rng: &mut R) -> Result<f64> {
        if self.s == p.dim() {
            return Ok(p.volume());
        }
        match (self.evaluator, &self.frames) {
            (Evaluator::Exact, _) => Ok(exact_intrinsic(p, self.s, self.angle_samples, rng)?.value),
            (Evaluator::Kubota { .. }, Some(frames)) => Ok(kubota_with_frames(p.vertices(), frames)?.value),
            (Evaluator::Kubota { dirs }, None) => Ok(kubota_intrinsic(p.vertices(), self.s, dirs, rng)?.value),
        }
    }

    /// `V_s(conv(P u {y})) - V_s(P)`.
    fn increment<R: Rng + ?Sized>(&self, p: &Polytope, base: f64, y: &Vector, rng: &mut R) -> Result<f64> {
        if p.max_violation(y) <= 0.0 {
            return Ok(0.0);
        }
        if self.s == p.dim() {
            return Ok(p.added_volume(y));
        }
        Ok(self.value(&p.extended(&[*y])?, rng)? - base)
    }
}

fn sample_hull<R: Rng + ?Sized>(body: &BodySpec, n: usize, rng: &mut R) -> Result<Polytope> {
    convex_hull(&sample_body(body, n, rng), body.dim())
}

fn reference_cache() -> &'static Mutex<HashMap<(Vec<u64>, usize, usize), (f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<u64>, usize, usize), (f64, f64)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `V_s(K)` and its standard error: exact for balls and for `s = d`;
/// otherwise Kubota averaging with exact ellipse projections over
/// `dirs` frames from a fixed stream, cached.
pub fn reference_intrinsic(body: &BodySpec, s: usize, dirs: usize) -> Result<(f64, f64)> {
    let d = body.dim();
    if body.is_ball() {
        return Ok((ball_intrinsic(d, s), 0.0));
    }
    let axes = body.semiaxes();
    let key = (axes.iter().map(|a| a.to_bits()).collect::<Vec<_>>(), s, dirs);
    if let Some(v) = reference_cache().lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let mut rng = RngStream::keyed(REFERENCE_SEED, &[TAG_REFERENCE, s as u64]).rng();
    let est = ellipsoid_intrinsic(&axes, s, dirs, &mut rng)?;
    let v = (est.value, est.std_error);
    reference_cache().lock().unwrap().insert(key, v);
    Ok(v)
}

fn level_stats(values: &[f64]) -> (f64, f64, f64) {
    let var = sample_variance(values);
    let var_se = jackknife_variance_of_variance(values).sqrt();
    (mean(values), var, var_se)
}

/// Sample variance of `V_s(K_n)` over replications at each grid level, with
/// its jackknife standard error, and the fitted power of `n`.
pub fn variance_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    let mut table = ExperimentTable::new(
        "variance",
        &["n", "mean", "variance", "variance_se", "reps", "resamples"],
        cfg.pairs("variance"),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let eval = LevelEvaluator::new(cfg, level)?;
        let (values, resamples) = replicate(cfg.seed, &[TAG_POINTS, n as u64], cfg.reps, |rng| {
            let p = sample_hull(&cfg.body, n, rng)?;
            eval.value(&p, rng)
        })?;
        let (m, var, var_se) = level_stats(&values);
        table.resamples += resamples;
        table.rows.push(vec![
            Cell::Int(n as u64),
            Cell::Real(m),
            Cell::Real(var),
            Cell::Real(var_se),
            Cell::Int(cfg.reps as u64),
            Cell::Int(resamples),
        ]);
        fit_rows.push((n as f64, var, var_se));
    }
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
    }
    Ok(table)
}

/// Mean gap `V_s(K) - E V_s(K_n)`, its fitted power of `n`, and the scaled
/// gaps `gap (n / lambda_d(K))^{2/(d+1)}`.
pub fn expectation_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    let d = cfg.body.dim();
    let (reference, reference_se) = reference_intrinsic(&cfg.body, cfg.s, cfg.reference_dirs)?;
    let volume = cfg.body.volume();
    let mut table = ExperimentTable::new(
        "expectation",
        &["n", "mean", "gap", "gap_se", "c_hat", "reps", "resamples"],
        cfg.pairs("expectation"),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    let mut c_hats = Vec::new();
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let eval = LevelEvaluator::new(cfg, level)?;
        let (values, resamples) = replicate(cfg.seed, &[TAG_POINTS, n as u64], cfg.reps, |rng| {
            let p = sample_hull(&cfg.body, n, rng)?;
            eval.value(&p, rng)
        })?;
        let m = mean(&values);
        let gap = reference - m;
        let gap_se = (sample_variance(&values) / cfg.reps as f64 + reference_se * reference_se).sqrt();
        let c_hat = gap * (n as f64 / volume).powf(2.0 / (d as f64 + 1.0));
        table.resamples += resamples;
        table.rows.push(vec![
            Cell::Int(n as u64),
            Cell::Real(m),
            Cell::Real(gap),
            Cell::Real(gap_se),
            Cell::Real(c_hat),
            Cell::Int(cfg.reps as u64),
            Cell::Int(resamples),
        ]);
        fit_rows.push((n as f64, gap, gap_se));
        c_hats.push(c_hat);
    }
    let top = &c_hats[c_hats.len() / 2..];
    let spread = (top.iter().cloned().fold(f64::MIN, f64::max) - top.iter().cloned().fold(f64::MAX, f64::min))
        / mean(top).abs();
    table.summary.insert("c_hat_spread".into(), spread);
    table.summary.insert("reference".into(), reference);
    table.summary.insert("reference_se".into(), reference_se);
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
    }
    Ok(table)
}

/// Efron–Stein estimate `(n+1) E(V_s(K_{n+1}) - V_s(K_n))^2`, averaged over
/// `es_points` independent last points per replication, next to the sample
/// variance of `V_s(K_n)` on the same point sets.
pub fn efron_stein_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    if cfg.es_points == 0 {
        return Err(Error::Config("es_points must be positive".into()));
    }
    let mut table = ExperimentTable::new(
        "efron-stein",
        &["n", "es", "es_se", "variance", "variance_se", "reps", "resamples"],
        cfg.pairs("efron-stein"),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    let mut dominated = true;
    for (level, &n) in cfg.n_grid.iter().enumerate() {
        let eval = LevelEvaluator::new(cfg, level)?;
        let (pairs, resamples) = replicate(cfg.seed, &[TAG_POINTS, n as u64], cfg.reps, |rng| {
            let p = sample_hull(&cfg.body, n, rng)?;
            let v = eval.value(&p, rng)?;
            let mut sq = 0.0;
            for _ in 0..cfg.es_points {
                let y = uniform_body(&cfg.body, rng);
                let delta = eval.increment(&p, v, &y, rng)?;
                sq += delta * delta;
            }
            Ok((v, (n + 1) as f64 * sq / cfg.es_points as f64))
        })?;
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let es_values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let es = mean(&es_values);
        let es_se = (sample_variance(&es_values) / cfg.reps as f64).sqrt();
        let (_, var, var_se) = level_stats(&values);
        dominated &= es >= var - 3.0 * (es_se * es_se + var_se * var_se).sqrt();
        table.resamples += resamples;
        table.rows.push(vec![
            Cell::Int(n as u64),
            Cell::Real(es),
            Cell::Real(es_se),
            Cell::Real(var),
            Cell::Real(var_se),
            Cell::Int(cfg.reps as u64),
            Cell::Int(resamples),
        ]);
        fit_rows.push((n as f64, es, es_se));
    }
    table.summary.insert("dominates".into(), dominated as u8 as f64);
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
        let var_rows: Vec<_> = table
            .rows
            .iter()
            .map(|r| (r[0].as_f64(), r[3].as_f64(), r[4].as_f64()))
            .collect();
        table.fits.insert("variance".into(), fit_exponent(&var_rows)?);
    }
    Ok(table)
}

/// A single growing sample observed at nested checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub reference: f64,
    pub checkpoints: Vec<usize>,
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    /// `gap n^{2/(d+1)}`.
    pub scaled_gaps: Vec<f64>,
}

impl Trajectory {
    pub fn gaps_non_increasing(&self) -> bool {
        self.gaps.windows(2).all(|w| w[1] <= w[0])
    }

    /// Coefficient of variation of the last `k` scaled gaps.
    pub fn relative_fluctuation(&self, k: usize) -> f64 {
        let tail = &self.scaled_gaps[self.scaled_gaps.len().saturating_sub(k)..];
        sample_variance(tail).sqrt() / mean(tail).abs()
    }
}

/// Follows one point stream through the checkpoints `n_k = k^4`, returning
/// the trajectory and its table. The hull is only rebuilt when a new point
/// falls outside it.
pub fn strong_law_trajectory(cfg: &ExperimentConfig) -> Result<(Trajectory, ExperimentTable)> {
    cfg.validate()?;
    let d = cfg.body.dim();
    let (reference, _) = reference_intrinsic(&cfg.body, cfg.s, cfg.reference_dirs)?;
    let eval = LevelEvaluator::new(cfg, usize::MAX)?;
    let mut rng = RngStream::keyed(cfg.seed, &[TAG_TRAJECTORY]).rng();
    let checkpoints: Vec<usize> = cfg.checkpoints.iter().map(|k| k.pow(4)).collect();
    if checkpoints[0] < d + 1 {
        return Err(Error::Config(format!("first checkpoint must be at least d+1 = {}", d + 1)));
    }

    let mut points = sample_body(&cfg.body, checkpoints[0], &mut rng);
    let mut hull = loop {
        match convex_hull(&points, d) {
            Ok(p) => break p,
            Err(Error::DegenerateInput(_)) => points.push(uniform_body(&cfg.body, &mut rng)),
            Err(e) => return Err(e),
        }
    };
    let mut count = points.len();
    let mut values = Vec::new();
    let mut current = eval.value(&hull, &mut rng)?;
    for (i, &n) in checkpoints.iter().enumerate() {
        if i > 0 {
            let mut outside = Vec::new();
            while count < n {
                let y = uniform_body(&cfg.body, &mut rng);
                count += 1;
                if hull.max_violation(&y) > 0.0 {
                    outside.push(y);
                }
            }
            if !outside.is_empty() {
                hull = hull.extended(&outside)?;
                // V_s is monotone under inclusion; keep roundoff from
                // breaking that
                current = current.max(eval.value(&hull, &mut rng)?);
            }
        }
        values.push(current);
    }
    let exponent = 2.0 / (d as f64 + 1.0);
    let gaps: Vec<f64> = values.iter().map(|v| reference - v).collect();
    let scaled: Vec<f64> = gaps
        .iter()
        .zip(&checkpoints)
        .map(|(g, &n)| g * (n as f64).powf(exponent))
        .collect();
    let traj = Trajectory {
        reference,
        checkpoints: checkpoints.clone(),
        values,
        gaps,
        scaled_gaps: scaled,
    };

    let mut table = ExperimentTable::new(
        "strong-law",
        &["n", "value", "gap", "scaled_gap"],
        cfg.pairs("strong-law"),
        cfg.seed,
    );
    for i in 0..checkpoints.len() {
        table.rows.push(vec![
            Cell::Int(checkpoints[i] as u64),
            Cell::Real(traj.values[i]),
            Cell::Real(traj.gaps[i]),
            Cell::Real(traj.scaled_gaps[i]),
        ]);
    }
    table.summary.insert("non_increasing".into(), traj.gaps_non_increasing() as u8 as f64);
    table.summary.insert("relative_fluctuation_last5".into(), traj.relative_fluctuation(5));
    Ok((traj, table))
}

/// Frequency with which the ball of radius `r(c log n / n)` (the floating
/// body of the unit-volume normalization) is not contained in `K_n`.
pub fn floating_containment_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    if !cfg.body.is_ball() {
        return Err(Error::Config("the floating-body experiment needs a ball".into()));
    }
    let d = cfg.body.dim();
    let kappa = linalg::ball_volume(d);
    let mut table = ExperimentTable::new(
        "floating",
        &["n", "radius", "failures", "reps", "frequency", "resamples"],
        cfg.pairs("floating"),
        cfg.seed,
    );
    for &n in &cfg.n_grid {
        let t = cfg.c * (n as f64).ln() / n as f64 * kappa;
        let radius = if t >= 0.5 * kappa {
            0.0
        } else {
            wet_part(d, t)?.floating_radius
        };
        let (fails, resamples) = replicate(cfg.seed, &[TAG_POINTS, n as u64], cfg.reps, |rng| {
            let p = sample_hull(&cfg.body, n, rng)?;
            Ok(match p.min_facet_offset() {
                Ok(r) => r < radius,
                Err(Error::OriginOutside { .. }) => true,
                Err(e) => return Err(e),
            })
        })?;
        let failures = fails.iter().filter(|f| **f).count();
        table.resamples += resamples;
        table.rows.push(vec![
            Cell::Int(n as u64),
            Cell::Real(radius),
            Cell::Int(failures as u64),
            Cell::Int(cfg.reps as u64),
            Cell::Real(failures as f64 / cfg.reps as f64),
            Cell::Int(resamples),
        ]);
    }
    Ok(table)
}
