//! Flat `key = value` experiment descriptions.
//!
//! ```text
//! kind = area
//! n = 32
//! n = 64
//! beta = 0.8
//! c_lambda = 1
//! samples = 500
//! thinning = 4N
//! ```
//!
//! List keys (`n`, `column`) may repeat; every other key appears at most
//! once. `#` starts a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::self_dual_beta;

/// Environment variable that replaces the configured master seed.
pub const SEED_ENV: &str = "PREWET_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Record observables only.
    Sample,
    Tail,
    Area,
    MaxHeight,
    Multipoint,
    Coupling,
    Verify,
}

impl ExperimentKind {
    pub fn samples_chains(self) -> bool {
        !matches!(self, ExperimentKind::Verify)
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sample" => ExperimentKind::Sample,
            "tail" => ExperimentKind::Tail,
            "area" => ExperimentKind::Area,
            "maxheight" => ExperimentKind::MaxHeight,
            "multipoint" => ExperimentKind::Multipoint,
            "coupling" => ExperimentKind::Coupling,
            "verify" => ExperimentKind::Verify,
            other => return Err(Error::InvalidConfig(format!("unknown experiment kind {other:?}"))),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Tail => "tail",
            ExperimentKind::Area => "area",
            ExperimentKind::MaxHeight => "maxheight",
            ExperimentKind::Multipoint => "multipoint",
            ExperimentKind::Coupling => "coupling",
            ExperimentKind::Verify => "verify",
        })
    }
}

/// Sweeps between samples, possibly scaled by the box size: `500`, `4N`, `1N2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaled {
    Fixed(u64),
    PerN(u64),
    PerNSquared(u64),
}

impl Scaled {
    pub fn at(self, n: u32) -> u64 {
        let n = n as u64;
        match self {
            Scaled::Fixed(k) => k,
            Scaled::PerN(k) => k * n,
            Scaled::PerNSquared(k) => k * n * n,
        }
    }
}

impl FromStr for Scaled {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot read {s:?} as a sweep count (e.g. 500, 4N, 2N2)"));
        let (digits, make): (&str, fn(u64) -> Scaled) = if let Some(d) = s.strip_suffix("N2") {
            (d, Scaled::PerNSquared)
        } else if let Some(d) = s.strip_suffix('N') {
            (d, Scaled::PerN)
        } else {
            (s, Scaled::Fixed)
        };
        let k = if digits.is_empty() { 1 } else { digits.parse().map_err(|_| bad())? };
        Ok(make(k))
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaled::Fixed(k) => write!(f, "{k}"),
            Scaled::PerN(k) => write!(f, "{k}N"),
            Scaled::PerNSquared(k) => write!(f, "{k}N2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub run_id: String,
    /// Box sizes `N`; the box is `[0, N]^2` with `λ = c_λ / N`.
    pub sizes: Vec<u32>,
    pub beta: f64,
    pub c_lambda: f64,
    pub chains: u64,
    /// Samples per chain.
    pub samples: usize,
    pub burn_in_cap: Scaled,
    pub thinning: Scaled,
    pub check_interval: Scaled,
    pub seed: u64,
    /// Columns whose heights are recorded; empty means `N / 2`.
    pub columns: Vec<i32>,
    /// `R` in the multipoint mesh spacing `⌈√R⌉ N^{2/3}`.
    pub mesh_r: f64,
    /// Bootstrap resamples for fit intervals.
    pub resamples: usize,
    pub output_dir: PathBuf,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Sample,
            run_id: "run".into(),
            sizes: vec![32, 64, 128, 256],
            beta: 0.8,
            c_lambda: 1.0,
            chains: 1,
            samples: 100,
            burn_in_cap: Scaled::PerNSquared(200),
            thinning: Scaled::PerNSquared(1),
            check_interval: Scaled::PerN(1),
            seed: 1,
            columns: Vec::new(),
            mesh_r: 4.0,
            resamples: 200,
            output_dir: PathBuf::from("."),
            svg: false,
        }
    }
}

/// A configuration with the `key = value` pairs it was read from.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub echo: Vec<(String, String)>,
}

const LIST_KEYS: [&str; 2] = ["n", "column"];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidConfig(format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    /// Parse without consulting the environment.
    pub fn parse(text: &str) -> Result<ParsedConfig> {
        let mut cfg = ExperimentConfig { sizes: Vec::new(), ..Default::default() };
        let mut echo: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
            if !LIST_KEYS.contains(&key) && echo.iter().any(|(k, _)| k == key) {
                return Err(Error::InvalidConfig(format!("line {}: {key} given twice", lineno + 1)));
            }
            match key {
                "kind" => cfg.kind = value.parse()?,
                "run_id" => {
                    if value.is_empty() || value.contains(['/', '\\']) {
                        return Err(Error::InvalidConfig(format!("run_id {value:?} is not a plain file stem")));
                    }
                    cfg.run_id = value.into()
                }
                "n" => cfg.sizes.push(parse_value(key, value)?),
                "beta" => cfg.beta = parse_value(key, value)?,
                "c_lambda" => cfg.c_lambda = parse_value(key, value)?,
                "chains" => cfg.chains = parse_value(key, value)?,
                "samples" => cfg.samples = parse_value(key, value)?,
                "burn_in_cap" => cfg.burn_in_cap = value.parse()?,
                "thinning" => cfg.thinning = value.parse()?,
                "check_interval" => cfg.check_interval = value.parse()?,
                "seed" => cfg.seed = parse_value(key, value)?,
                "column" => cfg.columns.push(parse_value(key, value)?),
                "mesh_r" => cfg.mesh_r = parse_value(key, value)?,
                "resamples" => cfg.resamples = parse_value(key, value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "svg" => cfg.svg = parse_value(key, value)?,
                other => return Err(Error::InvalidConfig(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
            echo.push((key.to_string(), value.to_string()));
        }
        if cfg.sizes.is_empty() {
            cfg.sizes = ExperimentConfig::default().sizes;
        }
        Ok(ParsedConfig { config: cfg, echo })
    }

    /// Parse, then apply the seed override from the environment if set.
    pub fn parse_with_env(text: &str) -> Result<ParsedConfig> {
        let mut parsed = ExperimentConfig::parse(text)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            parsed.config.seed =
                s.trim().parse().map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}={s:?} is not an integer")))?;
        }
        Ok(parsed)
    }

    pub fn from_file(path: &std::path::Path) -> Result<ParsedConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        ExperimentConfig::parse_with_env(&text)
    }

    /// Canonical text form; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let mut out = vec![format!("kind = {}", self.kind), format!("run_id = {}", self.run_id)];
        out.extend(self.sizes.iter().map(|n| format!("n = {n}")));
        out.push(format!("beta = {}", self.beta));
        out.push(format!("c_lambda = {}", self.c_lambda));
        out.push(format!("chains = {}", self.chains));
        out.push(format!("samples = {}", self.samples));
        out.push(format!("burn_in_cap = {}", self.burn_in_cap));
        out.push(format!("thinning = {}", self.thinning));
        out.push(format!("check_interval = {}", self.check_interval));
        out.push(format!("seed = {}", self.seed));
        out.extend(self.columns.iter().map(|x| format!("column = {x}")));
        out.push(format!("mesh_r = {}", self.mesh_r));
        out.push(format!("resamples = {}", self.resamples));
        out.push(format!("output_dir = {}", self.output_dir.display()));
        out.push(format!("svg = {}", self.svg));
        out.join("\n") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.kind.samples_chains() {
            if !(self.beta > self_dual_beta()) {
                return bad(format!("beta = {} is not above the critical value {:.6}", self.beta, self_dual_beta()));
            }
            if !(self.c_lambda >= 0.0 && self.c_lambda.is_finite()) {
                return bad(format!("c_lambda = {} must be finite and non-negative", self.c_lambda));
            }
            if self.sizes.iter().any(|&n| n < 2) {
                return bad("every n must be at least 2".into());
            }
            if self.chains == 0 {
                return bad("chains must be positive".into());
            }
            for (name, s) in [("thinning", self.thinning), ("burn_in_cap", self.burn_in_cap), ("check_interval", self.check_interval)] {
                if s.at(2) == 0 {
                    return bad(format!("{name} must be positive"));
                }
            }
        }
        if !(self.mesh_r > 0.0) {
            return bad("mesh_r must be positive".into());
        }
        if self.resamples < 100 {
            return bad("resamples must be at least 100".into());
        }
        Ok(())
    }
}
