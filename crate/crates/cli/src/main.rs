//! `stochgeo`: command-line front end.
//!
//! Every option except `--config`, `--threads`, `--in` and `--out` is also a
//! config-file key (dashes become underscores). Flags override the file; the
//! seed falls back to `STOCHGEO_SEED`, then 0.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use stochgeo::caps::{cap_volume, wet_part};
use stochgeo::experiments::config::body_from_params;
use stochgeo::experiments::{
    angle_measure_experiment, cap_cover_experiment, config_hash, efron_stein_experiment,
    expectation_experiment, floating_containment_experiment, hatvs_variance_experiment,
    parse_f64_grid, strong_law_trajectory, variance_experiment, AngleConfig, CoverConfig,
    ExperimentConfig, ExperimentTable, HatVsConfig, Params,
};
use stochgeo::geometry::Vector;
use stochgeo::hull::{Facet, Polytope};
use stochgeo::intrinsic::{exact_intrinsic, kubota_intrinsic, steiner_fit_oracle};
use stochgeo::sampling::{sample_body, RngStream};
use stochgeo::Error;

const USAGE_EXIT: u8 = 2;
const NUMERIC_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "stochgeo", version, about = "Random polytopes in the ball and in ellipsoids")]
struct Cli {
    /// Config file of `key = value` lines; flags override its entries
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for experiments (default: all cores); results do not depend on it
    #[arg(long, global = true, value_name = "COUNT")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw i.i.d. uniform points from a body and write them as polytope JSON
    Sample(SampleArgs),
    /// Convex hull of a point set: facets, volume, surface area
    Hull(HullArgs),
    /// One intrinsic volume V_s of a polytope
    Intrinsic(IntrinsicArgs),
    /// Volume of the cap of height t of the unit ball
    Capvol(CapArgs),
    /// Wet part and floating body of the unit ball for cap volume t
    Wetpart(CapArgs),
    /// Economic cap covers of the wet part, audited by sampling
    Capcover(CoverArgs),
    /// Scaling experiments; writes one CSV row per grid value
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// Variance of V_s(K_n) against n
    Variance(PolytopeArgs),
    /// Mean gap V_s(K) - E V_s(K_n) against n
    Expectation(PolytopeArgs),
    /// Efron-Stein upper bound next to the sample variance
    EfronStein(PolytopeArgs),
    /// One nested trajectory n = k^4 with the scaled gap
    StrongLaw(PolytopeArgs),
    /// Haar measure of subspaces within angle alpha of a fixed direction
    AngleMeasure(AngleArgs),
    /// Variance of the restricted projection functional over a small simplex
    Hatvs(HatVsArgs),
    /// Frequency with which the floating body is not inside K_n
    Floating(PolytopeArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Body: `ball` or `ellipsoid`
    #[arg(long)]
    body: Option<String>,
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// Ellipsoid semi-axes, comma separated (lengths)
    #[arg(long)]
    semiaxes: Option<String>,
    /// Number of points
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON path (default: stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HullArgs {
    /// Input JSON `{dim, vertices, facets?}`
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output JSON path (default: stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntrinsicArgs {
    /// Input JSON `{dim, vertices, facets?}`
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Index s of V_s (0..=dim)
    #[arg(long)]
    s: Option<usize>,
    /// `external-angle`, `kubota` or `steiner`
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo budget: directions per external angle, Kubota frames, or hit points per Steiner shell
    #[arg(long)]
    samples: Option<usize>,
    /// Steiner radii, comma list or `a..bxr` (lengths)
    #[arg(long)]
    lambda: Option<String>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CapArgs {
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// capvol: cap height in [0, 2] (unit-ball radii); wetpart: cap volume in (0, kappa_d/2] (absolute volume)
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args)]
struct CoverArgs {
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// Cap volumes as fractions of the ball volume, comma list or `a..bxr`
    #[arg(long)]
    t: Option<String>,
    /// Wet-part points sampled for the coverage audit
    #[arg(long)]
    points: Option<usize>,
    /// Caps sampled for the containment audit
    #[arg(long)]
    caps: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; a `.json` sidecar is written next to it (default: CSV on stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolytopeArgs {
    /// Body: `ball` or `ellipsoid`
    #[arg(long)]
    body: Option<String>,
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// Ellipsoid semi-axes, comma separated (lengths)
    #[arg(long)]
    semiaxes: Option<String>,
    /// Index s of V_s (default: dim)
    #[arg(long)]
    s: Option<usize>,
    /// Sample sizes, comma list, `a..b` or geometric `a..bxr` (points)
    #[arg(long)]
    n: Option<String>,
    /// Replications per sample size
    #[arg(long)]
    reps: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// `exact` or `kubota`
    #[arg(long)]
    evaluator: Option<String>,
    /// Kubota frames per evaluation
    #[arg(long)]
    dirs: Option<usize>,
    /// Monte Carlo directions per external angle (normal dimension >= 3)
    #[arg(long)]
    angle_samples: Option<usize>,
    /// Share Kubota frames across the replications of a grid level (true/false)
    #[arg(long)]
    common_frames: Option<bool>,
    /// Extra points per replication in the Efron-Stein estimate
    #[arg(long)]
    es_points: Option<usize>,
    /// Strong law: checkpoint indices k, sample sizes k^4
    #[arg(long)]
    checkpoints: Option<String>,
    /// Floating: constant c in the cap volume c ln(n)/n
    #[arg(long)]
    c: Option<f64>,
    /// Ellipsoid: Kubota frames for the reference value
    #[arg(long)]
    reference_dirs: Option<usize>,
    /// Output CSV path; a `.json` sidecar is written next to it (default: CSV on stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AngleArgs {
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// Subspace dimension s (1..dim)
    #[arg(long)]
    s: Option<usize>,
    /// Angles, comma list or `a..bxr` (radians)
    #[arg(long)]
    alpha: Option<String>,
    /// Haar frames per angle
    #[arg(long)]
    frames: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; a `.json` sidecar is written next to it (default: CSV on stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HatVsArgs {
    /// Ambient dimension (2..=8)
    #[arg(long)]
    dim: Option<usize>,
    /// Subspace dimension s (1..=dim)
    #[arg(long)]
    s: Option<usize>,
    /// Cap volumes, comma list or `a..bxr` (absolute volume)
    #[arg(long)]
    t: Option<String>,
    /// Points drawn from the small simplex per t
    #[arg(long)]
    reps: Option<usize>,
    /// Haar frames drawn per t before the angle restriction
    #[arg(long)]
    frames: Option<usize>,
    /// Paired draws for the monotonicity check
    #[arg(long)]
    pairs: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; a `.json` sidecar is written next to it (default: CSV on stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

macro_rules! flag_params {
    ($args:expr; $($field:ident),* $(,)?) => {{
        let mut p = Params::new();
        $(
            if let Some(v) = &$args.$field {
                p.set(stringify!($field), v.to_string());
            }
        )*
        p
    }};
}

/// Polytope interchange format; facets are optional and always recomputed.
#[derive(Serialize, Deserialize)]
struct PolytopeFile {
    dim: usize,
    vertices: Vec<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<Facet>>,
}

fn resolve(file: &Option<PathBuf>, flags: Params, keys: &[&str]) -> Result<Params, Error> {
    let mut p = match file {
        Some(path) => Params::from_file(path)?,
        None => Params::new(),
    };
    p.merge(&flags);
    p.check_keys(keys)?;
    Ok(p)
}

fn log_hash(pairs: &BTreeMap<String, String>) {
    eprintln!("config_hash {}", config_hash(pairs));
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_polytope(path: &Path) -> Result<Polytope, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("--in {}: {e}", path.display())))?;
    let file: PolytopeFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("--in {}: {e}", path.display())))?;
    if let Some(i) = file.vertices.iter().position(|v| v.dim() != file.dim) {
        return Err(Error::Config(format!("--in: vertex {i} does not have dim = {} coordinates", file.dim)));
    }
    Polytope::from_parts(file.dim, &file.vertices, file.facets.as_deref())
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<(), Error> {
    let p = resolve(&cli.config, flag_params!(a; body, dim, semiaxes, n, seed), &["body", "dim", "semiaxes", "n", "seed"])?;
    let body = body_from_params(&p)?;
    let n: usize = p.require("n")?;
    let seed = p.seed()?;
    let mut pairs = BTreeMap::new();
    stochgeo::experiments::config::body_pairs(&body, &mut pairs);
    pairs.insert("n".into(), n.to_string());
    pairs.insert("seed".into(), seed.to_string());
    log_hash(&pairs);
    let points = sample_body(&body, n, &mut RngStream::new(seed, 0).rng());
    let file = PolytopeFile {
        dim: body.dim(),
        vertices: points,
        facets: None,
    };
    write_or_print(&a.out, &serde_json::to_string_pretty(&file)?)
}

fn hull(a: &HullArgs) -> Result<(), Error> {
    let p = read_polytope(&a.input)?;
    let out = json!({
        "dim": p.dim(),
        "vertices": p.vertices(),
        "facets": p.facets(),
        "volume": p.volume(),
        "surface_area": p.surface_area(),
    });
    write_or_print(&a.out, &serde_json::to_string_pretty(&out)?)
}

fn intrinsic(cli: &Cli, a: &IntrinsicArgs) -> Result<(), Error> {
    let p = resolve(&cli.config, flag_params!(a; s, method, samples, lambda, seed), &["s", "method", "samples", "lambda", "seed"])?;
    let poly = read_polytope(&a.input)?;
    let s: usize = p.require("s")?;
    if s > poly.dim() {
        return Err(Error::Config(format!("--s must be at most {}, got {s}", poly.dim())));
    }
    let method = p.raw("method").unwrap_or("external-angle").to_string();
    let samples: usize = p.get_or("samples", 20_000)?;
    let seed = p.seed()?;
    let mut pairs = BTreeMap::new();
    pairs.insert("in".into(), a.input.display().to_string());
    pairs.insert("s".into(), s.to_string());
    pairs.insert("method".into(), method.clone());
    pairs.insert("samples".into(), samples.to_string());
    pairs.insert("seed".into(), seed.to_string());
    let stream = RngStream::new(seed, 0);
    let est = match method.as_str() {
        "external-angle" => exact_intrinsic(&poly, s, samples, &mut stream.rng())?,
        "kubota" => {
            if s == 0 {
                return Err(Error::Config("--s 0 is not available with --method kubota".into()));
            }
            kubota_intrinsic(poly.vertices(), s, samples, &mut stream.rng())?
        }
        "steiner" => {
            let grid = parse_f64_grid(p.raw("lambda").unwrap_or("0.1,0.2,0.3,0.4,0.5,0.6"))?;
            pairs.insert("lambda".into(), stochgeo::experiments::config::format_f64_grid(&grid));
            steiner_fit_oracle(&poly, &grid, samples, stream)?.estimates[s]
        }
        other => return Err(Error::Config(format!("--method: unknown method {other:?}"))),
    };
    log_hash(&pairs);
    println!("{}", serde_json::to_string(&est)?);
    Ok(())
}

fn cap_params(cli: &Cli, a: &CapArgs) -> Result<(usize, f64), Error> {
    let p = resolve(&cli.config, flag_params!(a; dim, t), &["dim", "t"])?;
    let d: usize = p.require("dim")?;
    if !(1..=stochgeo::geometry::MAX_DIM).contains(&d) {
        return Err(Error::Config(format!("--dim must lie in 1..={}", stochgeo::geometry::MAX_DIM)));
    }
    let t: f64 = p.require("t")?;
    let mut pairs = BTreeMap::new();
    pairs.insert("dim".into(), d.to_string());
    pairs.insert("t".into(), format!("{t:e}"));
    log_hash(&pairs);
    Ok((d, t))
}

fn capvol(cli: &Cli, a: &CapArgs) -> Result<(), Error> {
    let (d, t) = cap_params(cli, a)?;
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::Config(format!("--t must lie in [0, 2], got {t}")));
    }
    println!("{}", cap_volume(d, t));
    Ok(())
}

fn wetpart(cli: &Cli, a: &CapArgs) -> Result<(), Error> {
    let (d, t) = cap_params(cli, a)?;
    let profile = wet_part(d, t).map_err(|e| match e {
        Error::OutOfRange { .. } => Error::Config(format!("--t: {e}")),
        e => e,
    })?;
    println!("{}", serde_json::to_string(&profile)?);
    Ok(())
}

fn emit(table: &ExperimentTable, out: &Option<PathBuf>) -> Result<(), Error> {
    eprintln!("config_hash {}", table.config_hash);
    match out {
        Some(path) => {
            let sidecar = table.write(path)?;
            eprintln!("wrote {} and {}", path.display(), sidecar.display());
            if let Some(f) = table.fit {
                println!("slope {:.6} stderr {:.6}", f.slope, f.stderr);
            }
        }
        None => print!("{}", table.to_csv()?),
    }
    Ok(())
}

fn polytope_experiment(cli: &Cli, which: &Experiment, a: &PolytopeArgs) -> Result<(), Error> {
    let flags = flag_params!(a; body, dim, semiaxes, s, n, reps, seed, evaluator, dirs, angle_samples,
        common_frames, es_points, checkpoints, c, reference_dirs);
    let cfg = ExperimentConfig::from_params(&resolve(&cli.config, flags, ExperimentConfig::KEYS)?)?;
    let table = match which {
        Experiment::Variance(_) => variance_experiment(&cfg)?,
        Experiment::Expectation(_) => expectation_experiment(&cfg)?,
        Experiment::EfronStein(_) => efron_stein_experiment(&cfg)?,
        Experiment::StrongLaw(_) => strong_law_trajectory(&cfg)?.1,
        Experiment::Floating(_) => floating_containment_experiment(&cfg)?,
        _ => unreachable!("not a polytope experiment"),
    };
    emit(&table, &a.out)
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Sample(a) => sample(cli, a),
        Command::Hull(a) => hull(a),
        Command::Intrinsic(a) => intrinsic(cli, a),
        Command::Capvol(a) => capvol(cli, a),
        Command::Wetpart(a) => wetpart(cli, a),
        Command::Capcover(a) => {
            let flags = flag_params!(a; dim, t, points, caps, seed);
            let cfg = CoverConfig::from_params(&resolve(&cli.config, flags, CoverConfig::KEYS)?)?;
            emit(&cap_cover_experiment(&cfg)?, &a.out)
        }
        Command::Experiment(which) => match which {
            Experiment::Variance(a)
            | Experiment::Expectation(a)
            | Experiment::EfronStein(a)
            | Experiment::StrongLaw(a)
            | Experiment::Floating(a) => polytope_experiment(cli, which, a),
            Experiment::AngleMeasure(a) => {
                let flags = flag_params!(a; dim, s, alpha, frames, seed);
                let cfg = AngleConfig::from_params(&resolve(&cli.config, flags, AngleConfig::KEYS)?)?;
                emit(&angle_measure_experiment(&cfg)?, &a.out)
            }
            Experiment::Hatvs(a) => {
                let flags = flag_params!(a; dim, s, t, reps, frames, pairs, seed);
                let cfg = HatVsConfig::from_params(&resolve(&cli.config, flags, HatVsConfig::KEYS)?)?;
                emit(&hatvs_variance_experiment(&cfg)?, &a.out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_EXIT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let usage = e.is_config_error() || matches!(e, Error::Io(_));
            ExitCode::from(if usage { USAGE_EXIT } else { NUMERIC_EXIT })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_map_to_config_keys() {
        let cli = Cli::try_parse_from(["stochgeo", "experiment", "variance", "--angle-samples", "9", "--dim", "2"]).unwrap();
        let Command::Experiment(Experiment::Variance(a)) = &cli.command else {
            panic!("wrong subcommand");
        };
        let p = flag_params!(a; dim, angle_samples, reps);
        assert_eq!(p.raw("angle_samples"), Some("9"));
        assert_eq!(p.raw("dim"), Some("2"));
        assert_eq!(p.raw("reps"), None);
    }

    #[test]
    fn flags_win_over_the_file() {
        let dir = std::env::temp_dir().join(format!("stochgeo-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.cfg");
        std::fs::write(&path, "dim = 3\nt = 0.5\n").unwrap();
        let mut flags = Params::new();
        flags.set("t", "0.25");
        let p = resolve(&Some(path.clone()), flags, &["dim", "t"]).unwrap();
        assert_eq!(p.raw("dim"), Some("3"));
        assert_eq!(p.raw("t"), Some("0.25"));
        assert!(resolve(&Some(path), Params::new(), &["dim"]).unwrap_err().is_config_error());
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn polytope_files_accept_optional_facets() {
        let f: PolytopeFile = serde_json::from_str(r#"{"dim":2,"vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(f.facets.is_none());
        let p = Polytope::from_parts(f.dim, &f.vertices, None).unwrap();
        let text = serde_json::to_string(&PolytopeFile {
            dim: 2,
            vertices: p.vertices().to_vec(),
            facets: Some(p.facets().to_vec()),
        })
        .unwrap();
        let g: PolytopeFile = serde_json::from_str(&text).unwrap();
        assert_eq!(g.facets.unwrap().len(), 3);
        assert!(serde_json::from_str::<PolytopeFile>(r#"{"dim":2}"#).is_err());
    }
}
