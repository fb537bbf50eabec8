//! Run configuration: built-in defaults, overridden by a `key = value` file,
//! overridden in turn by explicit values (command-line flags).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::geodesic::IntegratorConfig;
use crate::models::{CurvatureMode, ModelSpec};
use crate::riccati::RiccatiConfig;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "HOROCURV_CONFIG";

/// Default Monte-Carlo count for sphere averages.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
/// Default number of directions in a scan.
pub const DEFAULT_SCAN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub model: String,
    pub dim: Option<usize>,
    pub k: f64,
    pub amplitude: f64,
    pub curvature_mode: CurvatureMode,
    /// Monte-Carlo count for `verify`, row count for `scan`.
    pub samples: Option<usize>,
    pub seed: u64,
    pub step: f64,
    pub horizon: f64,
    pub tol: f64,
    pub max_horizon: f64,
    pub renormalize_every: usize,
    /// Directions averaged in the integrated identity.
    pub directions: usize,
    /// Random planes drawn for the sectional spread.
    pub spread_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let spec = ModelSpec::default();
        let riccati = RiccatiConfig::default();
        Self {
            model: spec.name,
            dim: spec.dim,
            k: spec.k,
            amplitude: spec.amplitude,
            curvature_mode: spec.curvature_mode,
            samples: None,
            seed: 42,
            step: riccati.integrator.step,
            horizon: riccati.horizon,
            tol: riccati.convergence_tol,
            max_horizon: riccati.max_horizon,
            renormalize_every: riccati.integrator.renormalize_every,
            directions: 4,
            spread_samples: 4096,
        }
    }
}

/// Values that replace the corresponding [`SuiteConfig`] fields when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub model: Option<String>,
    pub dim: Option<usize>,
    pub k: Option<f64>,
    pub amplitude: Option<f64>,
    pub curvature_mode: Option<CurvatureMode>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub max_horizon: Option<f64>,
    pub renormalize_every: Option<usize>,
    pub directions: Option<usize>,
    pub spread_samples: Option<usize>,
}

fn parse<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| GeomError::Config(format!("line {line}: invalid value `{value}` for `{key}`")))
}

impl ConfigOverrides {
    /// Parses one `key = value` per line. Blank lines and lines starting with
    /// `#` are skipped; keys accept `-` or `_` as separators.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let n = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(GeomError::Config(format!("line {n}: expected `key = value`, got `{line}`")));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            match key.as_str() {
                "model" => o.model = Some(value.to_string()),
                "dim" => o.dim = Some(parse(&key, value, n)?),
                "k" => o.k = Some(parse(&key, value, n)?),
                "amplitude" => o.amplitude = Some(parse(&key, value, n)?),
                "curvature_mode" => o.curvature_mode = Some(parse(&key, value, n)?),
                "samples" => o.samples = Some(parse(&key, value, n)?),
                "seed" => o.seed = Some(parse(&key, value, n)?),
                "step" => o.step = Some(parse(&key, value, n)?),
                "horizon" => o.horizon = Some(parse(&key, value, n)?),
                "tol" => o.tol = Some(parse(&key, value, n)?),
                "max_horizon" => o.max_horizon = Some(parse(&key, value, n)?),
                "renormalize_every" => o.renormalize_every = Some(parse(&key, value, n)?),
                "directions" => o.directions = Some(parse(&key, value, n)?),
                "spread_samples" => o.spread_samples = Some(parse(&key, value, n)?),
                other => return Err(GeomError::Config(format!("line {n}: unknown key `{other}`"))),
            }
        }
        Ok(o)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeomError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_kv(&text)
    }
}

impl SuiteConfig {
    pub fn apply(mut self, o: &ConfigOverrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(model, k, amplitude, curvature_mode, seed, step, horizon, tol, max_horizon, renormalize_every, directions, spread_samples);
        if o.dim.is_some() {
            self.dim = o.dim;
        }
        if o.samples.is_some() {
            self.samples = o.samples;
        }
        self
    }

    /// Defaults, then the file at `path` (or the one named by
    /// `HOROCURV_CONFIG` when `path` is `None`), then `cli`.
    pub fn resolve(path: Option<&Path>, cli: &ConfigOverrides) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty());
        let file = match (path, &env_path) {
            (Some(p), _) => Some(ConfigOverrides::read(p)?),
            (None, Some(p)) => Some(ConfigOverrides::read(Path::new(p))?),
            (None, None) => None,
        };
        let mut cfg = Self::default();
        if let Some(f) = &file {
            cfg = cfg.apply(f);
        }
        let cfg = cfg.apply(cli);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GeomError::Config(m));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.renormalize_every == 0 {
            return bad("renormalize_every must be at least 1".into());
        }
        if self.samples == Some(0) {
            return bad("samples must be at least 1".into());
        }
        if self.directions == 0 || self.spread_samples < 2 {
            return bad("directions must be ≥ 1 and spread_samples ≥ 2".into());
        }
        Ok(())
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            name: self.model.clone(),
            dim: self.dim,
            k: self.k,
            amplitude: self.amplitude,
            curvature_mode: self.curvature_mode,
        }
    }

    pub fn riccati(&self) -> RiccatiConfig {
        RiccatiConfig {
            integrator: IntegratorConfig { step: self.step, renormalize_every: self.renormalize_every, ..Default::default() },
            horizon: self.horizon,
            convergence_tol: self.tol,
            max_horizon: self.max_horizon.max(self.horizon),
            ..Default::default()
        }
    }

    pub fn mc_samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_MC_SAMPLES)
    }

    pub fn scan_samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SCAN_SAMPLES)
    }
}
