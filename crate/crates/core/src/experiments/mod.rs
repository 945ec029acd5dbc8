//! Replicated Monte Carlo experiments on random polytopes and caps.
//!
//! Every replication draws from its own stream keyed by
//! `(seed, experiment tag, level, replication, attempt)`, and results are
//! collected in replication order, so tables do not depend on the number of
//! worker threads.

mod cap_runs;
pub mod config;
mod polytope_runs;

pub use cap_runs::{
    angle_measure_experiment, cap_cover_experiment, exact_angle_measure, hatvs_variance_experiment,
    AngleConfig, CoverConfig, HatVsConfig,
};
pub use config::{config_hash, parse_f64_grid, parse_usize_grid, Params, SEED_ENV};
pub use polytope_runs::{
    efron_stein_experiment, expectation_experiment, floating_containment_experiment,
    reference_intrinsic, strong_law_trajectory, variance_experiment, Trajectory,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{BodySpec, RngStream};
use crate::stats::PowerFit;
use config::{body_from_params, body_pairs, format_usize_grid};

/// Attempts per replication before a degenerate sample is reported.
pub const MAX_ATTEMPTS: u64 = 64;

/// How `V_s` of a sampled polytope is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    /// Volume, half the surface area, or the external-angle sum.
    Exact,
    /// Kubota averaging over `dirs` Haar frames.
    Kubota { dirs: usize },
}

/// Configuration of the random-polytope experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub body: BodySpec,
    pub s: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub evaluator: Evaluator,
    /// Monte Carlo directions per external angle in normal dimension >= 3.
    pub angle_samples: usize,
    /// Kubota frames drawn once per grid level and shared by all replications.
    pub common_frames: bool,
    /// Extra points per replication in the Efron–Stein estimate.
    pub es_points: usize,
    /// Trajectory checkpoint indices `k`; the checkpoints are `k^4`.
    pub checkpoints: Vec<usize>,
    /// Floating-body constant.
    pub c: f64,
    /// Frames for the ellipsoid reference values.
    pub reference_dirs: usize,
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "body",
        "dim",
        "semiaxes",
        "s",
        "n",
        "reps",
        "seed",
        "evaluator",
        "dirs",
        "angle_samples",
        "common_frames",
        "es_points",
        "checkpoints",
        "c",
        "reference_dirs",
    ];

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys(Self::KEYS)?;
        let body = body_from_params(p)?;
        let evaluator = match p.raw("evaluator").unwrap_or("exact") {
            "exact" => Evaluator::Exact,
            "kubota" => Evaluator::Kubota {
                dirs: p.get_or("dirs", 64)?,
            },
            other => return Err(Error::Config(format!("unknown evaluator {other:?}"))),
        };
        let cfg = ExperimentConfig {
            s: p.get_or("s", body.dim())?,
            n_grid: parse_usize_grid(p.raw("n").unwrap_or("128..8192x2"))?,
            reps: p.get_or("reps", 100)?,
            seed: p.seed()?,
            evaluator,
            angle_samples: p.get_or("angle_samples", 4000)?,
            common_frames: p.get_or("common_frames", true)?,
            es_points: p.get_or("es_points", 16)?,
            checkpoints: parse_usize_grid(p.raw("checkpoints").unwrap_or("2..18"))?,
            c: p.get_or("c", 10.0)?,
            reference_dirs: p.get_or("reference_dirs", 1_000_000)?,
            body,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.body.dim();
        if self.s == 0 || self.s > d {
            return Err(Error::Config(format!("s must lie in 1..={d}, got {}", self.s)));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < d + 1 {
            return Err(Error::Config(format!("every n must be at least d+1 = {}", d + 1)));
        }
        if self.reps < 2 {
            return Err(Error::Config("reps must be at least 2".into()));
        }
        if let Evaluator::Kubota { dirs } = self.evaluator {
            if dirs == 0 {
                return Err(Error::Config("dirs must be positive".into()));
            }
        }
        if self.checkpoints.is_empty() || self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config("c must be positive".into()));
        }
        Ok(())
    }

    /// Canonical key/value pairs, the input of the config hash.
    pub fn pairs(&self, experiment: &str) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("experiment".into(), experiment.into());
        body_pairs(&self.body, &mut out);
        out.insert("s".into(), self.s.to_string());
        out.insert("n".into(), format_usize_grid(&self.n_grid));
        out.insert("reps".into(), self.reps.to_string());
        out.insert("seed".into(), self.seed.to_string());
        match self.evaluator {
            Evaluator::Exact => {
                out.insert("evaluator".into(), "exact".into());
                out.insert("angle_samples".into(), self.angle_samples.to_string());
            }
            Evaluator::Kubota { dirs } => {
                out.insert("evaluator".into(), "kubota".into());
                out.insert("dirs".into(), dirs.to_string());
                out.insert("common_frames".into(), self.common_frames.to_string());
            }
        }
        match experiment {
            "efron-stein" => {
                out.insert("es_points".into(), self.es_points.to_string());
            }
            "strong-law" => {
                out.insert("checkpoints".into(), format_usize_grid(&self.checkpoints));
            }
            "floating" => {
                out.insert("c".into(), format!("{:e}", self.c));
            }
            _ => {}
        }
        if !self.body.is_ball() && matches!(experiment, "expectation" | "strong-law") {
            out.insert("reference_dirs".into(), self.reference_dirs.to_string());
        }
        out
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match self {
            Cell::Int(i) => *i as f64,
            Cell::Real(x) => *x,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }
}

/// Rows of an experiment plus fits and metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Main power-law fit, if the experiment has one.
    pub fit: Option<PowerFit>,
    /// Secondary fits by name.
    pub fits: BTreeMap<String, PowerFit>,
    /// Scalar diagnostics by name.
    pub summary: BTreeMap<String, f64>,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub seed: u64,
    /// Replications redrawn after degenerate samples.
    pub resamples: u64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    slope: Option<f64>,
    stderr: Option<f64>,
    config_hash: &'a str,
    seed: u64,
    resamples: u64,
    fits: &'a BTreeMap<String, PowerFit>,
    summary: &'a BTreeMap<String, f64>,
    config: &'a BTreeMap<String, String>,
}

impl ExperimentTable {
    pub fn new(experiment: &str, columns: &[&str], config: BTreeMap<String, String>, seed: u64) -> Self {
        ExperimentTable {
            experiment: experiment.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            fits: BTreeMap::new(),
            summary: BTreeMap::new(),
            config_hash: config_hash(&config),
            config,
            seed,
            resamples: 0,
        }
    }

    /// Values of the named column as reals.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)
            .map_err(|e| Error::Config(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn sidecar_json(&self) -> Result<String> {
        let sidecar = Sidecar {
            experiment: &self.experiment,
            slope: self.fit.map(|f| f.slope),
            stderr: self.fit.map(|f| f.stderr),
            config_hash: &self.config_hash,
            seed: self.seed,
            resamples: self.resamples,
            fits: &self.fits,
            summary: &self.summary,
            config: &self.config,
        };
        Ok(serde_json::to_string_pretty(&sidecar)? + "\n")
    }

    /// Writes the CSV to `path` and the JSON sidecar next to it; returns the
    /// sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, self.to_csv()?)?;
        let sidecar = path.with_extension("json");
        std::fs::write(&sidecar, self.sidecar_json()?)?;
        Ok(sidecar)
    }
}

/// Runs `reps` replications of `f` in parallel. A replication whose draw is
/// degenerate is retried on a fresh stream; the number of retries is
/// returned with the results, which are in replication order.
pub(crate) fn replicate<T, F>(seed: u64, key: &[u64], reps: usize, f: F) -> Result<(Vec<T>, u64)>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
{
    let results: Vec<(T, u64)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut labels = key.to_vec();
            labels.push(r);
            labels.push(0);
            for attempt in 0..MAX_ATTEMPTS {
                *labels.last_mut().unwrap() = attempt;
                let mut rng = RngStream::keyed(seed, &labels).rng();
                match f(&mut rng) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(Error::DegenerateInput(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::DegenerateInput(format!(
                "replication {r} stayed degenerate after {MAX_ATTEMPTS} attempts"
            )))
        })
        .collect::<Result<_>>()?;
    let resamples = results.iter().map(|(_, a)| a).sum();
    Ok((results.into_iter().map(|(v, _)| v).collect(), resamples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let p = Params::parse("dim = 2\nseed = 5").unwrap();
        let cfg = ExperimentConfig::from_params(&p).unwrap();
        assert_eq!(cfg.s, 2);
        assert_eq!(cfg.n_grid.len(), 7);
        assert_eq!(cfg.seed, 5);
        for bad in ["dim = 2\ns = 3", "dim = 2\nn = 2,8", "dim = 2\nreps = 1", "dim = 2\nn = 8,8", "dim=2\nevaluator=magic"] {
            assert!(ExperimentConfig::from_params(&Params::parse(bad).unwrap()).is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_has_seventeen_significant_digits() {
        let mut t = ExperimentTable::new("demo", &["n", "x"], BTreeMap::new(), 1);
        t.rows.push(vec![Cell::Int(128), Cell::Real(1.0 / 3.0)]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "n,x\n128,3.3333333333333331e-1\n");
        let back: f64 = "3.3333333333333331e-1".parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn sidecar_carries_fit_and_hash() {
        let mut t = ExperimentTable::new("demo", &["n"], BTreeMap::new(), 9);
        t.fit = Some(PowerFit {
            slope: -1.5,
            stderr: 0.1,
            intercept: 0.0,
        });
        let v: serde_json::Value = serde_json::from_str(&t.sidecar_json().unwrap()).unwrap();
        assert_eq!(v["slope"], -1.5);
        assert_eq!(v["seed"], 9);
        assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn replication_order_is_stable() {
        let run = || {
            replicate(3, &[1, 2], 50, |rng| {
                use rand::Rng;
                Ok(rng.random::<u64>())
            })
            .unwrap()
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }
}
