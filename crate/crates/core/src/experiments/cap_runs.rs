use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use super::config::{format_f64_grid, parse_f64_grid, Params};
use super::{replicate, Cell, ExperimentTable};
use crate::caps::{cap_construction, economic_cover, HatVs};
use crate::error::{Error, Result};
use crate::geometry::{angle_to_subspace, Vector, MAX_DIM};
use crate::sampling::{haar_subspace, RngStream};
use crate::stats::{fit_exponent, jackknife_variance_of_variance, mean, sample_variance};

const TAG_ANGLE: u64 = 11;
const TAG_HATVS: u64 = 12;
const TAG_COVER: u64 = 13;

fn check_dims(d: usize, s: usize) -> Result<()> {
    if d < 2 || d > MAX_DIM || s == 0 || s > d {
        return Err(Error::Config(format!(
            "need 2 <= d <= {MAX_DIM} and 1 <= s <= d, got d={d}, s={s}"
        )));
    }
    Ok(())
}

/// `nu_s{L : angle(z, L) <= alpha}`. The squared norm of the projection of a
/// fixed unit vector onto a Haar `s`-subspace is Beta(s/2, (d-s)/2).
pub fn exact_angle_measure(d: usize, s: usize, alpha: f64) -> f64 {
    if s >= d {
        return 1.0;
    }
    let c2 = alpha.cos().powi(2);
    1.0 - beta_reg(s as f64 / 2.0, (d - s) as f64 / 2.0, c2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleConfig {
    pub d: usize,
    pub s: usize,
    pub alphas: Vec<f64>,
    pub frames: usize,
    pub seed: u64,
}

impl AngleConfig {
    pub const KEYS: &'static [&'static str] = &["dim", "s", "alpha", "frames", "seed"];

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys(Self::KEYS)?;
        let cfg = AngleConfig {
            d: p.require("dim")?,
            s: p.require("s")?,
            alphas: parse_f64_grid(p.raw("alpha").unwrap_or("0.4..0.05x0.7071067811865476"))?,
            frames: p.get_or("frames", 100_000)?,
            seed: p.seed()?,
        };
        check_dims(cfg.d, cfg.s)?;
        if cfg.alphas.iter().any(|a| !(*a > 0.0 && *a <= 0.5)) {
            return Err(Error::Config("angles must lie in (0, 0.5]".into()));
        }
        if cfg.frames == 0 {
            return Err(Error::Config("frames must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), "angle-measure".into());
        m.insert("dim".into(), self.d.to_string());
        m.insert("s".into(), self.s.to_string());
        m.insert("alpha".into(), format_f64_grid(&self.alphas));
        m.insert("frames".into(), self.frames.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// Empirical `nu_s{angle(e_1, L) <= alpha}` over `frames` Haar frames per
/// angle, the exact value, and the fitted power of `alpha`.
pub fn angle_measure_experiment(cfg: &AngleConfig) -> Result<ExperimentTable> {
    check_dims(cfg.d, cfg.s)?;
    let z = Vector::unit(cfg.d, 0);
    let counts: Vec<usize> = cfg
        .alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let mut rng = RngStream::keyed(cfg.seed, &[TAG_ANGLE, i as u64]).rng();
            let mut hits = 0;
            for _ in 0..cfg.frames {
                if angle_to_subspace(&z, &haar_subspace(cfg.d, cfg.s, &mut rng)?) <= alpha {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    let mut table = ExperimentTable::new(
        "angle-measure",
        &["alpha", "measure", "measure_se", "exact", "hits", "frames"],
        cfg.pairs(),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    let mut max_z: f64 = 0.0;
    for (&alpha, &hits) in cfg.alphas.iter().zip(&counts) {
        let n = cfg.frames as f64;
        let p = hits as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let exact = exact_angle_measure(cfg.d, cfg.s, alpha);
        let binomial_sd = (exact * (1.0 - exact) / n).sqrt();
        if binomial_sd > 0.0 {
            max_z = max_z.max((p - exact).abs() / binomial_sd);
        }
        table.rows.push(vec![
            Cell::Real(alpha),
            Cell::Real(p),
            Cell::Real(se),
            Cell::Real(exact),
            Cell::Int(hits as u64),
            Cell::Int(cfg.frames as u64),
        ]);
        if hits > 0 && hits < cfg.frames {
            fit_rows.push((alpha, p, se));
        }
    }
    table.summary.insert("max_binomial_z".into(), max_z);
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
    }
    let exact_rows: Vec<_> = cfg
        .alphas
        .iter()
        .map(|&a| (a, exact_angle_measure(cfg.d, cfg.s, a), 0.0))
        .collect();
    if exact_rows.len() >= 3 && exact_rows.iter().all(|r| r.1 > 0.0) {
        table.fits.insert("exact".into(), fit_exponent(&exact_rows)?);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HatVsConfig {
    pub d: usize,
    pub s: usize,
    pub ts: Vec<f64>,
    pub reps: usize,
    pub frames: usize,
    /// Paired draws for the monotonicity check.
    pub pairs: usize,
    pub seed: u64,
}

impl HatVsConfig {
    pub const KEYS: &'static [&'static str] = &["dim", "s", "t", "reps", "frames", "pairs", "seed"];

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys(Self::KEYS)?;
        let cfg = HatVsConfig {
            d: p.require("dim")?,
            s: p.require("s")?,
            ts: parse_f64_grid(p.raw("t").unwrap_or("0.03162277660168379..0.001x0.5623413251903491"))?,
            reps: p.get_or("reps", 400)?,
            frames: p.get_or("frames", 4000)?,
            pairs: p.get_or("pairs", 200)?,
            seed: p.seed()?,
        };
        check_dims(cfg.d, cfg.s)?;
        if cfg.ts.iter().any(|t| !(*t > 0.0 && *t <= 0.1)) {
            return Err(Error::Config("t values must lie in (0, 0.1]".into()));
        }
        if cfg.reps < 2 || cfg.frames == 0 {
            return Err(Error::Config("need reps >= 2 and frames >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), "hatvs".into());
        m.insert("dim".into(), self.d.to_string());
        m.insert("s".into(), self.s.to_string());
        m.insert("t".into(), format_f64_grid(&self.ts));
        m.insert("reps".into(), self.reps.to_string());
        m.insert("frames".into(), self.frames.to_string());
        m.insert("pairs".into(), self.pairs.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// For each `t`: `x = e_1`, `z_j` in `Delta_j` drawn once, then the variance
/// of `hat_vs(Z)` over `Z` uniform in `Delta_0`, with frames shared by all
/// `Z`. Also counts how often `hat_vs(Z_1) >= hat_vs(Z_2)` for
/// `Z_1 in Psi_1`, `Z_2 in Psi_2`.
pub fn hatvs_variance_experiment(cfg: &HatVsConfig) -> Result<ExperimentTable> {
    check_dims(cfg.d, cfg.s)?;
    let x = Vector::unit(cfg.d, 0);
    let mut table = ExperimentTable::new(
        "hatvs",
        &[
            "t",
            "mean",
            "variance",
            "variance_se",
            "efficiency",
            "psi1_fraction",
            "psi2_fraction",
            "pairs",
            "monotone_pairs",
            "reps",
        ],
        cfg.pairs(),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    let mut monotone_total = 0usize;
    let mut pair_total = 0usize;
    for (ti, &t) in cfg.ts.iter().enumerate() {
        let key = |label: u64| [TAG_HATVS, ti as u64, label];
        let family = cap_construction(&x, t)?;
        let mut rng = RngStream::keyed(cfg.seed, &key(0)).rng();
        let face: Vec<Vector> = (1..=cfg.d).map(|j| family.sample_delta(j, &mut rng)).collect();
        let (psi1, psi2) = family.psi_fractions(10_000, &mut rng);
        let functional = HatVs::new(&x, t, cfg.s, cfg.frames, RngStream::keyed(cfg.seed, &key(1)))?;

        let (values, _) = replicate(cfg.seed, &key(2), cfg.reps, |rng| {
            functional.evaluate(&family.sample_delta(0, rng), &face)
        })?;
        let (holds, _) = replicate(cfg.seed, &key(3), cfg.pairs, |rng| {
            let z1 = family.sample_psi(1, rng)?;
            let z2 = family.sample_psi(2, rng)?;
            let (a, b) = (functional.evaluate(&z1, &face)?, functional.evaluate(&z2, &face)?);
            Ok(a >= b * (1.0 - 1e-12))
        })?;
        let monotone = holds.iter().filter(|h| **h).count();
        monotone_total += monotone;
        pair_total += cfg.pairs;

        let var = sample_variance(&values);
        let var_se = jackknife_variance_of_variance(&values).sqrt();
        table.rows.push(vec![
            Cell::Real(t),
            Cell::Real(mean(&values)),
            Cell::Real(var),
            Cell::Real(var_se),
            Cell::Real(functional.efficiency()),
            Cell::Real(psi1),
            Cell::Real(psi2),
            Cell::Int(cfg.pairs as u64),
            Cell::Int(monotone as u64),
            Cell::Int(cfg.reps as u64),
        ]);
        if var > 0.0 {
            fit_rows.push((t, var, var_se));
        }
    }
    if pair_total > 0 {
        table
            .summary
            .insert("monotone_fraction".into(), monotone_total as f64 / pair_total as f64);
    }
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverConfig {
    pub d: usize,
    /// Cap volumes as fractions of `kappa_d`.
    pub ts: Vec<f64>,
    pub points: usize,
    pub caps: usize,
    pub seed: u64,
}

impl CoverConfig {
    pub const KEYS: &'static [&'static str] = &["dim", "t", "points", "caps", "seed"];

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys(Self::KEYS)?;
        let cfg = CoverConfig {
            d: p.require("dim")?,
            ts: parse_f64_grid(p.raw("t").unwrap_or("1e-3,1e-4,1e-5"))?,
            points: p.get_or("points", 10_000)?,
            caps: p.get_or("caps", 1000)?,
            seed: p.seed()?,
        };
        check_dims(cfg.d, 1)?;
        if cfg.ts.iter().any(|t| !(*t > 0.0 && *t <= 0.5)) {
            return Err(Error::Config("t values must lie in (0, 0.5]".into()));
        }
        Ok(cfg)
    }

    pub fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), "capcover".into());
        m.insert("dim".into(), self.d.to_string());
        m.insert("t".into(), format_f64_grid(&self.ts));
        m.insert("points".into(), self.points.to_string());
        m.insert("caps".into(), self.caps.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// Builds and audits a cover at each `t`; fits `m` against `1/t`.
pub fn cap_cover_experiment(cfg: &CoverConfig) -> Result<ExperimentTable> {
    let mut table = ExperimentTable::new(
        "capcover",
        &[
            "t",
            "m",
            "cap_height",
            "wet_fraction",
            "ratio",
            "uncovered",
            "points",
            "inner_disjoint",
            "uncontained_caps",
            "caps",
        ],
        cfg.pairs(),
        cfg.seed,
    );
    let mut fit_rows = Vec::new();
    for (i, &t) in cfg.ts.iter().enumerate() {
        let cover = economic_cover(cfg.d, t, RngStream::keyed(cfg.seed, &[TAG_COVER, i as u64, 0]))?;
        let audit = cover.audit(cfg.points, cfg.caps, RngStream::keyed(cfg.seed, &[TAG_COVER, i as u64, 1]))?;
        table.rows.push(vec![
            Cell::Real(t),
            Cell::Int(audit.m as u64),
            Cell::Real(cover.cap_height),
            Cell::Real(audit.wet_fraction),
            Cell::Real(audit.ratio),
            Cell::Int(audit.uncovered_points as u64),
            Cell::Int(cfg.points as u64),
            Cell::Int(audit.inner_disjoint as u64),
            Cell::Int(audit.uncontained_caps as u64),
            Cell::Int(cfg.caps as u64),
        ]);
        fit_rows.push((1.0 / t, audit.m as f64, 0.0));
    }
    if fit_rows.len() >= 3 {
        table.fit = Some(fit_exponent(&fit_rows)?);
    }
    let ratios = table.column("ratio").unwrap_or_default();
    if !ratios.is_empty() {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        table.summary.insert("ratio_window".into(), max / min);
    }
    Ok(table)
}
