//! Run configuration: JSON file mirroring the flags, flags taking
//! precedence, everything validated before any computation starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use pointscat::error::{Error, Result};
use pointscat::lattice::TorusGeometry;
use pointscat::spectrum::TailMode;

/// Partial configuration as read from `--config` (all fields optional).
#[derive(Debug, Default, Deserialize)]
pub struct ConfigFile {
    pub gamma: Option<String>,
    pub x: Option<f64>,
    pub phi: Option<f64>,
    pub mode: Option<String>,
    pub z: Option<[f64; 2]>,
    pub x0: Option<[f64; 2]>,
    pub eps: Option<f64>,
    pub k_max: Option<i64>,
    pub cutoff: Option<f64>,
    pub tail_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub oracle: Option<bool>,
    pub threads: Option<usize>,
    pub strategy: Option<String>,
    pub precision_digits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Torus,
    Dirichlet,
}

/// Fully resolved configuration; serialized into every run manifest.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub gamma: String,
    pub gamma_literal: String,
    pub x: f64,
    pub phi: f64,
    pub mode: Mode,
    pub z: [f64; 2],
    /// Scatterer position on the torus, for phase-sensitive mixed elements.
    pub x0: [f64; 2],
    pub eps: f64,
    pub k_max: i64,
    pub cutoff: f64,
    pub tail_mode: String,
    /// Execution detail, not part of the scientific identity of a run.
    #[serde(skip)]
    pub out: PathBuf,
    pub oracle: bool,
    /// Execution detail, not part of the scientific identity of a run.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub strategy: String,
    pub precision_digits: u32,
    #[serde(skip)]
    pub geometry: TorusGeometry,
}

pub struct Overrides {
    pub gamma: Option<String>,
    pub x: Option<f64>,
    pub phi: Option<f64>,
    pub mode: Option<String>,
    pub z: Option<String>,
    pub x0: Option<String>,
    pub eps: Option<f64>,
    pub k_max: Option<i64>,
    pub cutoff: Option<f64>,
    pub tail_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    pub threads: Option<usize>,
    pub strategy: Option<String>,
    pub precision_digits: Option<u32>,
    pub config: Option<PathBuf>,
}

fn parse_pair(flag: &str, spec: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "{flag} expects two comma-separated numbers, got '{spec}'"
        )));
    }
    let t1: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad component '{}'", parts[0])))?;
    let t2: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad component '{}'", parts[1])))?;
    Ok([t1, t2])
}

impl RunConfig {
    pub fn resolve(overrides: Overrides) -> Result<RunConfig> {
        let file: ConfigFile = match &overrides.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("config file {path:?}: {e}")))?
            }
            None => ConfigFile::default(),
        };

        let gamma = overrides
            .gamma
            .or(file.gamma)
            .unwrap_or_else(|| "golden".to_string());
        let precision_digits = overrides
            .precision_digits
            .or(file.precision_digits)
            .unwrap_or(pointscat::precision::DEFAULT_DIGITS);
        let geometry = match gamma.as_str() {
            "golden" => TorusGeometry::golden(precision_digits)?,
            "sqrt2" => TorusGeometry::sqrt2(precision_digits)?,
            literal => TorusGeometry::from_decimal_str(literal, precision_digits)?,
        };

        let x = overrides.x.or(file.x).unwrap_or(2000.0);
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Config(format!("X = {x} must be positive and finite")));
        }
        let phi = overrides
            .phi
            .or(file.phi)
            .unwrap_or(std::f64::consts::FRAC_PI_2);
        let mode = match overrides
            .mode
            .or(file.mode)
            .unwrap_or_else(|| "torus".to_string())
            .as_str()
        {
            "torus" => Mode::Torus,
            "dirichlet" => Mode::Dirichlet,
            other => {
                return Err(Error::Config(format!(
                    "unknown mode '{other}' (torus | dirichlet)"
                )))
            }
        };
        let z = match overrides.z {
            Some(spec) => parse_pair("--z", &spec)?,
            None => file
                .z
                .unwrap_or([1.0 / 7.0f64.sqrt(), 1.0 / 6.0f64.sqrt()]),
        };
        let x0 = match overrides.x0 {
            Some(spec) => parse_pair("--x0", &spec)?,
            None => file.x0.unwrap_or([0.0, 0.0]),
        };
        let eps = overrides.eps.or(file.eps).unwrap_or(0.5);
        if !(0.0 < eps && eps < 1.0) {
            return Err(Error::Config(format!("eps = {eps} outside (0, 1)")));
        }
        let k_max = overrides.k_max.or(file.k_max).unwrap_or(8);
        if k_max < 0 {
            return Err(Error::Config("k-max must be nonnegative".into()));
        }
        let cutoff = overrides.cutoff.or(file.cutoff).unwrap_or(x);
        if cutoff > x {
            return Err(Error::Config(format!(
                "tail cutoff {cutoff} exceeds the enumeration ceiling {x}"
            )));
        }
        let tail_mode = overrides
            .tail_mode
            .or(file.tail_mode)
            .unwrap_or_else(|| "integral".to_string());
        TailMode::parse(&tail_mode)?;
        let strategy = overrides
            .strategy
            .or(file.strategy)
            .unwrap_or_else(|| "weak".to_string());

        Ok(RunConfig {
            gamma_literal: geometry.gamma_literal().to_string(),
            gamma,
            x,
            phi,
            mode,
            z,
            x0,
            eps,
            k_max,
            cutoff,
            tail_mode,
            out: overrides
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            oracle: overrides.oracle || file.oracle.unwrap_or(false),
            threads: overrides.threads.or(file.threads),
            strategy,
            precision_digits,
            geometry,
        })
    }

    pub fn tail_mode(&self) -> TailMode {
        TailMode::parse(&self.tail_mode).expect("validated at resolve time")
    }

    /// Fingerprint of the scientific configuration. Where outputs land and
    /// how many threads compute them must not change what they contain, so
    /// `out`, `threads` and the oracle re-check flag stay out of the hash.
    pub fn manifest_hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct ScienceKey<'a> {
            gamma_literal: &'a str,
            x: f64,
            phi: f64,
            mode: Mode,
            z: [f64; 2],
            x0: [f64; 2],
            eps: f64,
            k_max: i64,
            cutoff: f64,
            tail_mode: &'a str,
            strategy: &'a str,
            precision_digits: u32,
        }
        pointscat::report::manifest_hash(&ScienceKey {
            gamma_literal: &self.gamma_literal,
            x: self.x,
            phi: self.phi,
            mode: self.mode,
            z: self.z,
            x0: self.x0,
            eps: self.eps,
            k_max: self.k_max,
            cutoff: self.cutoff,
            tail_mode: &self.tail_mode,
            strategy: &self.strategy,
            precision_digits: self.precision_digits,
        })
    }
}
