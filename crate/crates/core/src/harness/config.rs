//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma
//! separated and integer lists also accept `a..b` (end exclusive).
//! Tolerances are overridden with `tol.<name> = value`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::operators::RegularityPair;
use crate::solver::{Scheme, SolverConfig};
use crate::spectral::SpectralCoeffs;
use crate::stochastic::NoiseSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Named tolerances with their defaults.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("chen", 1e-12),
    ("area", 1e-10),
    ("x2_quadrature", 1e-8),
    ("symmetry", 1e-10),
    ("gamma_identity", 1e-8),
    ("x3", 1e-6),
    ("euler_order_slack", 0.1),
    ("l2_relative_drift", 1e-2),
    ("hamiltonian_order_width", 0.5),
    ("fit_stability", 0.05),
    ("covariance_se", 3.0),
    ("sewing_factor", 2.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    /// # Panics
    /// On a name missing from [`TOLERANCES`].
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("no tolerance named {name}"))
    }

    fn set(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        match self.0.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(ConfigError::UnknownKey(format!("tol.{name}"))),
        }
    }
}

/// Initial datum `u0(k) = k^{-decay}` for `k <= modes`, or read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    PowerLaw { modes: usize, decay: f64 },
    File(PathBuf),
}

impl InitialData {
    pub fn build(&self) -> Result<SpectralCoeffs, ConfigError> {
        match self {
            InitialData::PowerLaw { modes, decay } => {
                Ok(SpectralCoeffs::from_fn(*modes, |k| (k as f64).powf(-decay).into()))
            }
            InitialData::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                SpectralCoeffs::from_csv(&text)
                    .map_err(|e| ConfigError::Value { key: "initial_file".into(), msg: e.to_string() })
            }
        }
    }
}

/// Power-law noise weights `amplitude * k^{-beta}` on `k <= modes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSettings {
    pub modes: usize,
    pub amplitude: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub solver: SolverConfig,
    pub initial: InitialData,
    pub noise: NoiseSettings,
    pub n_values: Vec<usize>,
    pub mode_values: Vec<usize>,
    pub dt_values: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Random trials for the cheap identities.
    pub trials: usize,
    /// Random trials for the quadrature-checked identities.
    pub quadrature_trials: usize,
    /// Reference resolution as a multiple of the largest `n`.
    pub reference_factor: usize,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: "identities".into(),
            solver: SolverConfig {
                regularity: RegularityPair::new(0.4, 0.0, 2.0).expect("valid default"),
                max_mode: 32,
                steps_per_unit: 512,
                horizon: 0.125,
                dt: 0.125 / 8192.0,
                scheme: Scheme::Euler,
            },
            initial: InitialData::PowerLaw { modes: 8, decay: 1.0 },
            noise: NoiseSettings { modes: 8, amplitude: 1.0, beta: 1.0 },
            n_values: vec![64, 128, 256, 512],
            mode_values: vec![8, 16, 32, 64],
            dt_values: vec![1.0 / 512.0, 1.0 / 1024.0, 1.0 / 2048.0, 1.0 / 4096.0],
            seeds: (0..1000).collect(),
            trials: 100,
            quadrature_trials: 3,
            reference_factor: 8,
            output: None,
            tolerances: Tolerances::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), msg: e.to_string() })
}

/// Reals, with `1/512`-style fractions and `inf` accepted.
fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.trim().split_once('/') {
        Some((a, b)) => Ok(parse_num::<f64>(key, a)? / parse_num::<f64>(key, b)?),
        None => parse_num(key, v),
    }
}

fn parse_int_list<T>(key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T: std::str::FromStr + TryFrom<u64>,
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b): (u64, u64) = (parse_num(key, a)?, parse_num(key, b)?);
            for x in a..b {
                out.push(T::try_from(x).map_err(|_| ConfigError::Value { key: key.into(), msg: format!("{x} out of range") })?);
            }
        } else {
            out.push(parse_num(key, item)?);
        }
    }
    Ok(out)
}

fn parse_real_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_real(key, s)).collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Applies the assignments in `text` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let (mut gamma, mut alpha, mut p) = {
            let r = cfg.solver.regularity;
            (r.gamma, r.alpha, r.p)
        };
        let (mut modes, mut decay, mut file) = (8usize, 1.0f64, None::<PathBuf>);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "experiment" => cfg.experiment = value.to_string(),
                "gamma" => gamma = parse_real(key, value)?,
                "alpha" => alpha = parse_real(key, value)?,
                "p" => p = parse_real(key, value)?,
                "max_mode" => cfg.solver.max_mode = parse_num(key, value)?,
                "steps_per_unit" => cfg.solver.steps_per_unit = parse_num(key, value)?,
                "horizon" => cfg.solver.horizon = parse_real(key, value)?,
                "dt" => cfg.solver.dt = parse_real(key, value)?,
                "scheme" => {
                    cfg.solver.scheme = Scheme::parse(value)
                        .ok_or_else(|| ConfigError::Value { key: key.into(), msg: format!("unknown scheme `{value}`") })?
                }
                "initial_modes" => modes = parse_num(key, value)?,
                "initial_decay" => decay = parse_real(key, value)?,
                "initial_file" => file = Some(PathBuf::from(value)),
                "noise_modes" => cfg.noise.modes = parse_num(key, value)?,
                "noise_amplitude" => cfg.noise.amplitude = parse_real(key, value)?,
                "noise_beta" => cfg.noise.beta = parse_real(key, value)?,
                "n_values" => cfg.n_values = parse_int_list(key, value)?,
                "mode_values" => cfg.mode_values = parse_int_list(key, value)?,
                "dt_values" => cfg.dt_values = parse_real_list(key, value)?,
                "seeds" => cfg.seeds = parse_int_list(key, value)?,
                "trials" => cfg.trials = parse_num(key, value)?,
                "quadrature_trials" => cfg.quadrature_trials = parse_num(key, value)?,
                "reference_factor" => cfg.reference_factor = parse_num(key, value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                _ => match key.strip_prefix("tol.") {
                    Some(name) => cfg.tolerances.set(name, parse_real(key, value)?)?,
                    None => return Err(ConfigError::UnknownKey(key.into())),
                },
            }
        }
        cfg.solver.regularity =
            RegularityPair::new(gamma, alpha, p).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.initial = match file {
            Some(path) => InitialData::File(path),
            None => InitialData::PowerLaw { modes, decay },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.n_values.is_empty() || self.mode_values.is_empty() || self.dt_values.is_empty() || self.seeds.is_empty() {
            return bad("sweep lists must be non-empty");
        }
        if self.n_values.contains(&0) || self.mode_values.contains(&0) {
            return bad("sweep resolutions must be positive");
        }
        if self.dt_values.iter().any(|d| !(*d > 0.0)) {
            return bad("dt values must be positive");
        }
        if self.tolerances.0.values().any(|t| !(*t > 0.0)) {
            return bad("tolerances must be positive");
        }
        if self.trials == 0 || self.quadrature_trials == 0 || self.reference_factor < 2 {
            return bad("trials must be positive and reference_factor at least 2");
        }
        if self.noise.modes == 0 || !self.noise.amplitude.is_finite() || !self.noise.beta.is_finite() {
            return bad("noise settings must be finite with at least one mode");
        }
        Ok(())
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        let params = self.solver.regularity.norm_params();
        NoiseSpec::power_law(self.noise.modes, self.noise.amplitude, self.noise.beta, params)
            .expect("finite settings checked in validate")
    }
}
