//! Experiment configuration: flat `key = value` text or a flat JSON object.
//!
//! Parsing happens in two stages. [`RawConfig`] keeps the key/value strings
//! so command-line overrides can replace them; [`RawConfig::resolve`] fills
//! defaults, validates every constraint and yields an [`ExperimentConfig`]
//! whose [`ExperimentConfig::canonical`] echo re-parses to an equal value.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::finalstate::TheoremParameters;
use crate::grid::Grid;
use crate::nonlinearity::{Preset, DEFAULT_TOL};
use crate::profile::{default_delta, FinalData, FinalProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Classify,
    Scatter,
    Picard,
    Duhamel,
    Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Classify,
        Experiment::Scatter,
        Experiment::Picard,
        Experiment::Duhamel,
        Experiment::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Scatter => "scatter",
            Experiment::Picard => "picard",
            Experiment::Duhamel => "duhamel",
            Experiment::Sweep => "sweep",
        }
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
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown experiment `{}`", s.trim())))
    }
}

/// Shape of `û₊`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileShape {
    Gaussian,
    Bump,
}

impl FromStr for ProfileShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(ProfileShape::Gaussian),
            "bump" => Ok(ProfileShape::Bump),
            other => Err(Error::Config(format!(
                "profile must be `gaussian` or `bump`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for ProfileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileShape::Gaussian => "gaussian",
            ProfileShape::Bump => "bump",
        })
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "experiment",
    "preset",
    "d",
    "points",
    "box_length",
    "profile",
    "width",
    "eps",
    "delta",
    "b",
    "eta",
    "t_start",
    "t_max",
    "steps",
    "modes",
    "intervals",
    "substeps",
    "picard_iterations",
    "lipschitz_samples",
    "tol",
    "dealias",
    "fit_t_min",
    "fit_t_max",
    "sweep_eps",
    "seed",
    "out",
];

/// Unvalidated key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses JSON when the first non-blank character is `{`, else
    /// `key = value` lines with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_kv(text)
        }
    }

    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            raw.insert_new(key.trim(), value.trim())
                .map_err(|e| Error::Parse { line: idx + 1, msg: e.to_string() })?;
        }
        raw.require_nonempty()?;
        Ok(raw)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(map) = value else {
            return Err(Error::Config("JSON config must be an object".into()));
        };
        let mut raw = RawConfig::default();
        for (key, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::Number(n) => Ok(n.to_string()),
                        _ => Err(Error::Config(format!("`{key}` must be an array of numbers"))),
                    })
                    .collect::<Result<Vec<_>>>()?
                    .join(","),
                _ => return Err(Error::Config(format!("`{key}` has an unsupported JSON type"))),
            };
            raw.insert_new(&key, &text)?;
        }
        raw.require_nonempty()?;
        Ok(raw)
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.entries.is_empty() {
            Err(Error::Config("config is empty".into()))
        } else {
            Ok(())
        }
    }

    fn insert_new(&mut self, key: &str, value: &str) -> Result<()> {
        check_key(key)?;
        if self.entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
        Ok(())
    }

    /// Sets or replaces one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        check_key(key)?;
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override must be key=value, got `{pair}`")))?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    Error::Config(format!("cannot parse `{key}` from `{v}`"))
                })
            })
            .transpose()
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.value::<f64>(key)? {
            Some(x) if !x.is_finite() => Err(Error::Config(format!("`{key}` must be finite"))),
            other => Ok(other),
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let experiment = match self.get("experiment") {
            Some(e) => e.parse()?,
            None => Experiment::Scatter,
        };
        let preset_name = self
            .get("preset")
            .ok_or_else(|| Error::Config("missing required key `preset`".into()))?;
        let preset: Preset = preset_name.parse()?;
        let dim = match self.value::<usize>("d")? {
            Some(d) => d,
            None => preset.natural_dimension().unwrap_or(1),
        };
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("`d` must be 1 or 2, got {dim}")));
        }
        if let Some(natural) = preset.natural_dimension() {
            if natural != dim {
                return Err(Error::Config(format!(
                    "`d` = {dim} does not match preset `{preset}` (critical in d = {natural})"
                )));
            }
        }
        let profile = self.value::<ProfileShape>("profile")?.unwrap_or(ProfileShape::Gaussian);
        // Two-dimensional defaults keep the profile resolved on a 256² box.
        let width = self.float("width")?.unwrap_or(if dim == 1 { 1.0 } else { 0.1 });
        let eps = self.float("eps")?.unwrap_or(0.1);
        let delta = self.float("delta")?.unwrap_or_else(|| default_delta(dim));
        let b = self.float("b")?.unwrap_or_else(|| TheoremParameters::default_b(dim, delta));
        let eta = self.float("eta")?.unwrap_or_else(|| TheoremParameters::default_eta(dim, delta));
        let t_start = self.float("t_start")?.unwrap_or(10.0);
        let t_max = self.float("t_max")?.unwrap_or(if dim == 1 { 160.0 } else { 1000.0 });
        let params = TheoremParameters::new(dim, delta, b, eta, t_start, t_max, eps)
            .map_err(|e| Error::Config(e.to_string()))?;

        let positive = |key: &str, v: usize| -> Result<usize> {
            if v == 0 {
                Err(Error::Config(format!("`{key}` must be >= 1")))
            } else {
                Ok(v)
            }
        };
        let points = self.value::<usize>("points")?.unwrap_or(if dim == 1 { 16384 } else { 256 });
        let final_data = build_final_data(dim, profile, eps, width, delta)?;
        let box_length = match self.float("box_length")? {
            Some(l) => l,
            None => 4.0 * final_data.support_radius() * t_max,
        };
        let grid = Grid::new(dim, points, box_length).map_err(|e| Error::Config(e.to_string()))?;
        if experiment != Experiment::Classify {
            let cap = final_data.validity_cap(&grid);
            if t_max > cap * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "`t_max` = {t_max} exceeds the grid validity cap {cap}; increase `box_length`"
                )));
            }
            if grid.nyquist() < final_data.support_radius() {
                return Err(Error::Config(format!(
                    "`points` = {points} under-resolves the profile: Nyquist wavenumber {} is below the support radius {} of the final data",
                    grid.nyquist(),
                    final_data.support_radius()
                )));
            }
        }

        let steps = positive("steps", self.value("steps")?.unwrap_or(2000))?;
        let modes = positive("modes", self.value("modes")?.unwrap_or(64))?;
        let intervals = positive("intervals", self.value("intervals")?.unwrap_or(64))?;
        let substeps = positive("substeps", self.value("substeps")?.unwrap_or(8))?;
        let picard_iterations =
            positive("picard_iterations", self.value("picard_iterations")?.unwrap_or(6))?;
        let lipschitz_samples =
            positive("lipschitz_samples", self.value("lipschitz_samples")?.unwrap_or(10_000))?;
        let tol = self.float("tol")?.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            return Err(Error::Config("`tol` must be positive".into()));
        }
        let dealias = self.value::<bool>("dealias")?.unwrap_or(false);
        let fit_t_min = self.float("fit_t_min")?.unwrap_or(2.0 * t_start);
        let fit_t_max = self.float("fit_t_max")?.unwrap_or(0.5 * t_max);
        if !(fit_t_min < fit_t_max) {
            return Err(Error::Config(format!(
                "fit window [`fit_t_min`, `fit_t_max`] = [{fit_t_min}, {fit_t_max}] is empty"
            )));
        }
        let sweep_eps = match self.get("sweep_eps") {
            Some(list) => parse_list(list)?,
            None => vec![0.025, 0.05, 0.1],
        };
        if sweep_eps.is_empty() || sweep_eps.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::Config("`sweep_eps` must be a nonempty list of finite values >= 0".into()));
        }
        let seed = self.value::<u64>("seed")?.unwrap_or(0);
        let out = self.get("out").map(str::to_string);

        Ok(ExperimentConfig {
            experiment,
            preset,
            profile,
            width,
            points,
            box_length,
            params,
            steps,
            modes,
            intervals,
            substeps,
            picard_iterations,
            lipschitz_samples,
            tol,
            dealias,
            fit_t_min,
            fit_t_max,
            sweep_eps,
            seed,
            out,
        })
    }
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key `{key}`")))
    }
}

fn parse_list(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse `sweep_eps` entry `{}`", s.trim())))
        })
        .collect()
}

fn build_final_data(dim: usize, shape: ProfileShape, eps: f64, width: f64, delta: f64) -> Result<FinalData> {
    let profile = match shape {
        ProfileShape::Gaussian => FinalProfile::Gaussian { amplitude: eps, width },
        ProfileShape::Bump => FinalProfile::Bump { amplitude: eps, radius: width },
    };
    FinalData::new(dim, profile, delta).map_err(|e| Error::Config(e.to_string()))
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub preset: Preset,
    pub profile: ProfileShape,
    /// Gaussian width `σ` or bump radius, in the frequency variable.
    pub width: f64,
    pub points: usize,
    pub box_length: f64,
    pub params: TheoremParameters,
    pub steps: usize,
    pub modes: usize,
    pub intervals: usize,
    pub substeps: usize,
    pub picard_iterations: usize,
    pub lipschitz_samples: usize,
    pub tol: f64,
    pub dealias: bool,
    pub fit_t_min: f64,
    pub fit_t_max: f64,
    pub sweep_eps: Vec<f64>,
    pub seed: u64,
    pub out: Option<String>,
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RawConfig::parse(s)?.resolve()
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.params.dim, self.points, self.box_length).expect("validated at parse time")
    }

    pub fn final_data(&self) -> FinalData {
        self.final_data_with_eps(self.params.eps)
    }

    /// The same final data rescaled to `‖û₊‖_∞ = eps`.
    pub fn final_data_with_eps(&self, eps: f64) -> FinalData {
        build_final_data(self.params.dim, self.profile, eps, self.width, self.params.delta)
            .expect("validated at parse time")
    }

    /// `key = value` lines with every key resolved; re-parses to `self`.
    pub fn canonical(&self) -> String {
        let p = &self.params;
        let mut lines = vec![
            format!("experiment = {}", self.experiment),
            format!("preset = {}", self.preset),
            format!("d = {}", p.dim),
            format!("points = {}", self.points),
            format!("box_length = {:?}", self.box_length),
            format!("profile = {}", self.profile),
            format!("width = {:?}", self.width),
            format!("eps = {:?}", p.eps),
            format!("delta = {:?}", p.delta),
            format!("b = {:?}", p.b),
            format!("eta = {:?}", p.eta),
            format!("t_start = {:?}", p.t_start),
            format!("t_max = {:?}", p.t_max),
            format!("steps = {}", self.steps),
            format!("modes = {}", self.modes),
            format!("intervals = {}", self.intervals),
            format!("substeps = {}", self.substeps),
            format!("picard_iterations = {}", self.picard_iterations),
            format!("lipschitz_samples = {}", self.lipschitz_samples),
            format!("tol = {:?}", self.tol),
            format!("dealias = {}", self.dealias),
            format!("fit_t_min = {:?}", self.fit_t_min),
            format!("fit_t_max = {:?}", self.fit_t_max),
            format!(
                "sweep_eps = {}",
                self.sweep_eps.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>().join(",")
            ),
            format!("seed = {}", self.seed),
        ];
        if let Some(out) = &self.out {
            lines.push(format!("out = {out}"));
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical echo, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
