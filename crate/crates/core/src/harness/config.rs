use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::analytic::DEFAULT_C1;
use crate::error::{Error, Result};

pub const SEED_ENV: &str = "HOROEXTREME_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_HORIZON: f64 = 1e4;
pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    HitProb,
    Evl,
    Moments,
    Tail,
    SiegelCheck,
    LemmaChecks,
    KyIntegral,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::HitProb,
        Experiment::Evl,
        Experiment::Moments,
        Experiment::Tail,
        Experiment::SiegelCheck,
        Experiment::LemmaChecks,
        Experiment::KyIntegral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HitProb => "hit-prob",
            Experiment::Evl => "evl",
            Experiment::Moments => "moments",
            Experiment::Tail => "tail",
            Experiment::SiegelCheck => "siegel-check",
            Experiment::LemmaChecks => "lemma-checks",
            Experiment::KyIntegral => "ky-integral",
        }
    }

    pub fn default_r_values(self) -> Vec<f64> {
        match self {
            Experiment::HitProb | Experiment::Evl => vec![0.25, 0.5, 1.0],
            Experiment::Moments => vec![-0.25],
            Experiment::Tail => vec![-0.5, -1.0, -1.5, -2.0],
            Experiment::SiegelCheck => vec![0.0],
            Experiment::LemmaChecks => vec![0.3, -0.3, -0.34],
            Experiment::KyIntegral => vec![],
        }
    }

    pub fn default_t_values(self) -> Vec<f64> {
        match self {
            Experiment::Evl => vec![DEFAULT_HORIZON],
            Experiment::LemmaChecks => vec![100.0],
            _ => vec![],
        }
    }

    fn needs_r(self) -> bool {
        !matches!(self, Experiment::KyIntegral)
    }

    fn needs_t(self) -> bool {
        matches!(self, Experiment::Evl | Experiment::LemmaChecks)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Input(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub r_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub c1_parameter: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            r_values: experiment.default_r_values(),
            t_values: experiment.default_t_values(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            workers: 1,
            c1_parameter: DEFAULT_C1,
            output_path: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::Input(format!("samples must be at least {MIN_SAMPLES}, got {}", self.samples)));
        }
        if self.workers == 0 {
            return Err(Error::Input("workers must be positive".into()));
        }
        if !(self.c1_parameter > 0.0 && self.c1_parameter.is_finite()) {
            return Err(Error::Input(format!("c1 must be positive, got {}", self.c1_parameter)));
        }
        if self.experiment.needs_r() && self.r_values.is_empty() {
            return Err(Error::Input(format!("{} needs at least one r value", self.experiment)));
        }
        if self.experiment.needs_t() && self.t_values.is_empty() {
            return Err(Error::Input(format!("{} needs at least one T value", self.experiment)));
        }
        if let Some(r) = self.r_values.iter().find(|r| !r.is_finite()) {
            return Err(Error::Input(format!("r values must be finite, got {r}")));
        }
        if let Some(t) = self.t_values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Input(format!("T values must be positive and finite, got {t}")));
        }
        Ok(())
    }

    /// Applies `overrides` on top of the current values.
    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(v) = &overrides.r_values {
            self.r_values = v.clone();
        }
        if let Some(v) = &overrides.t_values {
            self.t_values = v.clone();
        }
        if let Some(v) = overrides.samples {
            self.samples = v;
        }
        if let Some(v) = overrides.seed {
            self.seed = v;
        }
        if let Some(v) = overrides.workers {
            self.workers = v;
        }
        if let Some(v) = overrides.c1_parameter {
            self.c1_parameter = v;
        }
        if let Some(v) = &overrides.output_path {
            self.output_path = Some(v.clone());
        }
        if let Some(v) = overrides.format {
            self.format = v;
        }
    }
}

/// Optional settings from one source (flags, a config file or the environment).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub r_values: Option<Vec<f64>>,
    pub t_values: Option<Vec<f64>>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub c1_parameter: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn from_env() -> Result<Self> {
        match std::env::var(SEED_ENV) {
            Ok(v) => Ok(Overrides { seed: Some(parse_u64(SEED_ENV, &v)?), ..Default::default() }),
            Err(_) => Ok(Overrides::default()),
        }
    }
}

pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Input(format!("{key}: '{s}' is not a number"))))
        .collect()
}

fn parse_u64(key: &str, text: &str) -> Result<u64> {
    text.trim().parse().map_err(|_| Error::Input(format!("{key}: '{text}' is not a nonnegative integer")))
}

/// Parses `key = value` lines. Keys mirror the long CLI flags; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_config_file(text: &str) -> Result<Overrides> {
    let mut out = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("config line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        match key {
            "r" => out.r_values = Some(parse_list(key, value)?),
            "T" => out.t_values = Some(parse_list(key, value)?),
            "samples" => out.samples = Some(parse_u64(key, value)?),
            "seed" => out.seed = Some(parse_u64(key, value)?),
            "workers" => out.workers = Some(parse_u64(key, value)? as usize),
            "c1" => {
                out.c1_parameter =
                    Some(value.parse().map_err(|_| Error::Input(format!("c1: '{value}' is not a number")))?)
            }
            "out" => out.output_path = Some(PathBuf::from(value)),
            "format" => out.format = Some(value.parse()?),
            _ => return Err(Error::Input(format!("config line {}: unknown key '{key}'", lineno + 1))),
        }
    }
    Ok(out)
}
