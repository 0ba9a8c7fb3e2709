//! Experiment configuration: a flat `key = value` text format with dotted keys.
//!
//! ```text
//! # IMCF limit in R³
//! command = imcf
//! metric = euclidean
//! n = 3
//! p = 1.5e0, 1.3e0, 1.2e0, 1.1e0, 1.05e0
//! grid.h = 7.8125e-3
//! tol.limit = 5e-2
//! ```
//!
//! Lists are comma separated. Numbers are written back in scientific notation
//! with the shortest digits that round-trip, so `parse(to_text(c)) == c`.

use plap_core::geometry::MetricName;
use plap_core::parabolic::{EquationKind, HarnackId, IdentityKind};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("bad value for `{key}`: `{value}` ({msg})")]
    BadValue { key: String, value: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveElliptic,
    Imcf,
    Parabolic,
    Entropy,
    Identities,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::SolveElliptic, Command::Imcf, Command::Parabolic, Command::Entropy, Command::Identities, Command::Verify];

    pub fn tag(&self) -> &'static str {
        match self {
            Command::SolveElliptic => "solve-elliptic",
            Command::Imcf => "imcf",
            Command::Parabolic => "parabolic",
            Command::Entropy => "entropy",
            Command::Identities => "identities",
            Command::Verify => "verify",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.tag() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Quick,
    Full,
}

impl Suite {
    pub fn tag(&self) -> &'static str {
        match self {
            Suite::Quick => "quick",
            Suite::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "quick" => Some(Suite::Quick),
            "full" => Some(Suite::Full),
            _ => None,
        }
    }
}

/// Initial data for parabolic and entropy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    Barenblatt,
    Fundamental,
    /// The fundamental solution minus a Gaussian bump, renormalized to unit mass.
    Perturbed,
    Gaussian,
}

impl InitialData {
    pub fn tag(&self) -> &'static str {
        match self {
            InitialData::Barenblatt => "barenblatt",
            InitialData::Fundamental => "fundamental",
            InitialData::Perturbed => "perturbed",
            InitialData::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<InitialData> {
        [InitialData::Barenblatt, InitialData::Fundamental, InitialData::Perturbed, InitialData::Gaussian]
            .into_iter()
            .find(|d| d.tag() == s)
    }
}

pub fn parse_equation(s: &str) -> Option<EquationKind> {
    [EquationKind::A, EquationKind::APressure, EquationKind::B, EquationKind::BReg].into_iter().find(|k| k.tag() == s)
}

/// Every field is optional; commands fill in their own defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub metric: Option<MetricName>,
    pub n: Option<usize>,
    /// A single p or a decreasing p sequence.
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Option<f64>,
    pub equation: Option<EquationKind>,
    pub data: Option<InitialData>,
    pub harnack: Vec<HarnackId>,
    pub identities: Vec<IdentityKind>,
    pub grid_h: Option<f64>,
    pub grid_extent: Vec<f64>,
    pub time_t0: Option<f64>,
    pub time_t1: Option<f64>,
    pub time_samples: Option<usize>,
    pub time_origin: Option<f64>,
    pub tol: BTreeMap<String, f64>,
    pub out_dir: Option<String>,
    pub plots: Vec<String>,
    pub seed: Option<u64>,
    pub suite: Option<Suite>,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn list<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, msg: "empty key".into() });
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::Duplicate(k.into()));
            }
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        ExperimentConfig::parse(&text)
    }

    /// Set one key from its textual value, as in the file format.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |msg: &str| ConfigError::BadValue { key: key.into(), value: value.into(), msg: msg.into() };
        let f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
        let fs = |s: &str| -> Result<Vec<f64>, ConfigError> {
            if s.trim().is_empty() {
                return Ok(Vec::new());
            }
            s.split(',').map(f).collect()
        };
        let uint = |s: &str| s.trim().parse::<u64>().map_err(|_| bad("not an unsigned integer"));
        let names = |s: &str| -> Vec<String> {
            s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
        };
        match key {
            "command" => self.command = Some(Command::parse(value).ok_or_else(|| bad("unknown command"))?),
            "metric" => self.metric = Some(MetricName::parse(value).map_err(|e| bad(&e.to_string()))?),
            "n" => self.n = Some(uint(value)? as usize),
            "p" => self.p = fs(value)?,
            "eps" => self.eps = fs(value)?,
            "delta" => self.delta = fs(value)?,
            "alpha" => self.alpha = Some(f(value)?),
            "equation" => self.equation = Some(parse_equation(value).ok_or_else(|| bad("expected A, A-pressure, B or B-reg"))?),
            "data" => self.data = Some(InitialData::parse(value).ok_or_else(|| bad("unknown initial data"))?),
            "harnack" => {
                self.harnack = names(value)
                    .iter()
                    .map(|s| HarnackId::parse(s).map_err(|e| bad(&e.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "identities" => {
                self.identities = names(value)
                    .iter()
                    .map(|s| IdentityKind::parse(s).map_err(|e| bad(&e.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "grid.h" => self.grid_h = Some(f(value)?),
            "grid.extent" => self.grid_extent = fs(value)?,
            "time.t0" => self.time_t0 = Some(f(value)?),
            "time.t1" => self.time_t1 = Some(f(value)?),
            "time.samples" => self.time_samples = Some(uint(value)? as usize),
            "time.origin" => self.time_origin = Some(f(value)?),
            "out.dir" => self.out_dir = Some(value.to_string()),
            "out.plots" => self.plots = names(value),
            "seed" => self.seed = Some(uint(value)?),
            "suite" => self.suite = Some(Suite::parse(value).ok_or_else(|| bad("expected quick or full"))?),
            _ => match key.strip_prefix("tol.") {
                Some(name) if !name.is_empty() => {
                    self.tol.insert(name.to_string(), f(value)?);
                }
                _ => return Err(ConfigError::UnknownKey(key.into())),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, v) in &self.tol {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("tolerance tol.{k} = {v} must be positive")));
            }
        }
        if self.p.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return Err(ConfigError::Invalid(format!("p values {:?} must be ≥ 1", self.p)));
        }
        if self.eps.iter().chain(&self.delta).any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(ConfigError::Invalid("ε and δ must be nonnegative".into()));
        }
        if matches!(self.n, Some(0)) {
            return Err(ConfigError::Invalid("n must be positive".into()));
        }
        if let Some(h) = self.grid_h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::Invalid(format!("grid.h = {h}")));
            }
        }
        if let (Some(a), Some(b)) = (self.time_t0, self.time_t1) {
            if !(b > a) {
                return Err(ConfigError::Invalid(format!("time.t1 = {b} must exceed time.t0 = {a}")));
            }
        }
        Ok(())
    }

    /// Canonical text: keys in a fixed order, absent fields omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(c) = self.command {
            put("command", c.tag().into());
        }
        if let Some(m) = self.metric {
            put("metric", m.tag());
        }
        if let Some(n) = self.n {
            put("n", n.to_string());
        }
        if !self.p.is_empty() {
            put("p", list(&self.p, |x| num(*x)));
        }
        if !self.eps.is_empty() {
            put("eps", list(&self.eps, |x| num(*x)));
        }
        if !self.delta.is_empty() {
            put("delta", list(&self.delta, |x| num(*x)));
        }
        if let Some(a) = self.alpha {
            put("alpha", num(a));
        }
        if let Some(e) = self.equation {
            put("equation", e.tag().into());
        }
        if let Some(d) = self.data {
            put("data", d.tag().into());
        }
        if !self.harnack.is_empty() {
            put("harnack", list(&self.harnack, |x| x.tag().into()));
        }
        if !self.identities.is_empty() {
            put("identities", list(&self.identities, |x| x.tag().into()));
        }
        if let Some(h) = self.grid_h {
            put("grid.h", num(h));
        }
        if !self.grid_extent.is_empty() {
            put("grid.extent", list(&self.grid_extent, |x| num(*x)));
        }
        if let Some(t) = self.time_t0 {
            put("time.t0", num(t));
        }
        if let Some(t) = self.time_t1 {
            put("time.t1", num(t));
        }
        if let Some(k) = self.time_samples {
            put("time.samples", k.to_string());
        }
        if let Some(t) = self.time_origin {
            put("time.origin", num(t));
        }
        for (k, v) in &self.tol {
            put(&format!("tol.{k}"), num(*v));
        }
        if let Some(d) = &self.out_dir {
            put("out.dir", d.clone());
        }
        if !self.plots.is_empty() {
            put("out.plots", self.plots.join(", "));
        }
        if let Some(s) = self.seed {
            put("seed", s.to_string());
        }
        if let Some(s) = self.suite {
            put("suite", s.tag().into());
        }
        out
    }

    pub fn tol_or(&self, name: &str, default: f64) -> f64 {
        self.tol.get(name).copied().unwrap_or(default)
    }

    pub fn first_p(&self, default: f64) -> f64 {
        self.p.first().copied().unwrap_or(default)
    }
}
