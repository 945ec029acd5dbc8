//! Flat `key = value` configuration shared by config files and command-line
//! flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::BodySpec;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "STOCHGEO_SEED";

/// Raw key/value assignments. Later assignments override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut params = Params::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            params.set(key, value.trim());
        }
        Ok(params)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.replace('-', "_"), value.into());
    }

    /// Applies `other` on top of `self`.
    pub fn merge(&mut self, other: &Params) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key {key}")));
            }
        }
        Ok(())
    }

    /// Seed from the `seed` key, then from [`SEED_ENV`], then 0.
    pub fn seed(&self) -> Result<u64> {
        if let Some(s) = self.get::<u64>("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("{SEED_ENV}: cannot parse {v:?}: {e}"))),
            Err(_) => Ok(0),
        }
    }
}

/// Parses `a..bxr` (geometric from `a` to at most `b` with ratio `r`),
/// `a..b` (unit steps) or a comma list.
pub fn parse_usize_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("bad integer grid {spec:?}"));
    if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, ratio) = match rest.split_once('x') {
            Some((hi, r)) => (hi, Some(r)),
            None => (rest, None),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        let mut out = Vec::new();
        match ratio {
            Some(r) => {
                let r: usize = r.trim().parse().map_err(|_| bad())?;
                if r < 2 {
                    return Err(bad());
                }
                let mut n = lo;
                while n <= hi {
                    out.push(n);
                    n *= r;
                }
            }
            None => out.extend(lo..=hi),
        }
        return Ok(out);
    }
    spec.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

/// Parses `a..bxr` (geometric, `r > 1` or `0 < r < 1`) or a comma list of
/// reals.
pub fn parse_f64_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad real grid {spec:?}"));
    if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, r) = rest.split_once('x').ok_or_else(bad)?;
        let a: f64 = lo.trim().parse().map_err(|_| bad())?;
        let b: f64 = hi.trim().parse().map_err(|_| bad())?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let direction_ok = if r > 1.0 { b >= a } else { b <= a };
        if !(a > 0.0 && b > 0.0 && r > 0.0 && r != 1.0 && direction_ok) {
            return Err(bad());
        }
        let steps = ((b / a).ln() / r.ln() + 1e-9).floor() as i64;
        return Ok((0..=steps.max(0)).map(|k| a * r.powi(k as i32)).collect());
    }
    spec.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

pub fn format_usize_grid(grid: &[usize]) -> String {
    grid.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

pub fn format_f64_grid(grid: &[f64]) -> String {
    grid.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

/// Body from the `body`, `dim` and `semiaxes` keys.
pub fn body_from_params(p: &Params) -> Result<BodySpec> {
    let kind = p.raw("body").unwrap_or("ball");
    let body = match kind {
        "ball" => BodySpec::ball(p.require("dim")?),
        "ellipsoid" => {
            let axes = parse_f64_grid(
                p.raw("semiaxes")
                    .ok_or_else(|| Error::Config("ellipsoid needs semiaxes".into()))?,
            )?;
            if let Some(d) = p.get::<usize>("dim")? {
                if d != axes.len() {
                    return Err(Error::Config(format!(
                        "dim = {d} but {} semiaxes given",
                        axes.len()
                    )));
                }
            }
            BodySpec::ellipsoid(&axes)
        }
        other => return Err(Error::Config(format!("unknown body {other:?}"))),
    };
    body.map_err(|e| Error::Config(e.to_string()))
}

pub fn body_pairs(body: &BodySpec, out: &mut BTreeMap<String, String>) {
    match body {
        BodySpec::Ball { dim } => {
            out.insert("body".into(), "ball".into());
            out.insert("dim".into(), dim.to_string());
        }
        BodySpec::Ellipsoid { semiaxes } => {
            out.insert("body".into(), "ellipsoid".into());
            out.insert("dim".into(), semiaxes.len().to_string());
            out.insert("semiaxes".into(), format_f64_grid(semiaxes));
        }
    }
}

/// SHA-256 of the sorted `key=value` lines, hex encoded.
pub fn config_hash(pairs: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in pairs {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
