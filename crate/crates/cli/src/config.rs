//! Experiment configuration.
//!
//! Flags, the optional key=value file and presets are all turned into string
//! layers keyed by long flag name, then resolved top-down: flags, file,
//! preset, built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Map, Value};
use subexit_core::TemperedStableParams;

use crate::error::{config, CliError};
use crate::report::Format;

pub type Layer = BTreeMap<String, Vec<String>>;

const KEYS: &[&str] = &[
    "driver",
    "alpha",
    "mu",
    "beta",
    "eps",
    "diffusion",
    "dim",
    "radius",
    "x0",
    "x0-grid",
    "ds",
    "trajectories",
    "max-steps",
    "seed",
    "out",
    "format",
    "rel-tol",
    "workers",
    "formula",
];

pub const DEFAULT_SEED: u64 = 20261019;
pub const DEFAULT_TRAJECTORIES: u64 = 20_000;

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gaussian or stable.
    #[arg(long)]
    pub driver: Option<String>,
    /// Clock stability index in (0, 1]; repeat to sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Clock tempering parameter; repeat to sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Vec<f64>,
    /// Spatial stability index of the stable driver.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Vec<f64>,
    /// Noise intensity.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Diffusion coefficient of the Gaussian driver.
    #[arg(long, allow_negative_numbers = true)]
    pub diffusion: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Start point along the first axis; repeatable.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    /// Evenly spaced start points, `lo:hi:count`, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub x0_grid: Option<String>,
    /// Operational time step.
    #[arg(long, allow_negative_numbers = true)]
    pub ds: Option<f64>,
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,
    /// Worker threads, 0 for all cores. Does not affect results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Closed form for `analytic`: gaussian, stable or escape.
    #[arg(long)]
    pub formula: Option<String>,
}

impl Params {
    pub fn to_layer(&self) -> Layer {
        let mut l = Layer::new();
        let mut put = |k: &str, v: Vec<String>| {
            if !v.is_empty() {
                l.insert(k.to_string(), v);
            }
        };
        fn one<T: ToString>(v: &Option<T>) -> Vec<String> {
            v.iter().map(ToString::to_string).collect()
        }
        fn many(v: &[f64]) -> Vec<String> {
            v.iter().map(ToString::to_string).collect()
        }
        put("driver", one(&self.driver));
        put("alpha", many(&self.alpha));
        put("mu", many(&self.mu));
        put("beta", many(&self.beta));
        put("eps", one(&self.eps));
        put("diffusion", one(&self.diffusion));
        put("dim", one(&self.dim));
        put("radius", one(&self.radius));
        put("x0", many(&self.x0));
        put("x0-grid", one(&self.x0_grid));
        put("ds", one(&self.ds));
        put("trajectories", one(&self.trajectories));
        put("max-steps", one(&self.max_steps));
        put("seed", one(&self.seed));
        put("out", self.out.iter().map(|p| p.display().to_string()).collect());
        put("format", one(&self.format));
        put("rel-tol", one(&self.rel_tol));
        put("workers", one(&self.workers));
        put("formula", one(&self.formula));
        l
    }
}

/// Parses `key = value` lines. `#` starts a comment, values may be
/// comma-separated lists, and repeated keys accumulate.
pub fn parse_config_text(text: &str) -> Result<Layer, CliError> {
    let mut l = Layer::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config(format!("line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(config(format!("line {}: unknown key {key:?}", no + 1)));
        }
        let vals = l.entry(key).or_default();
        vals.extend(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
    }
    Ok(l)
}

pub fn read_config_file(path: &Path) -> Result<Layer, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Builds a layer from literal pairs; a repeated key accumulates.
pub fn layer(pairs: &[(&str, &str)]) -> Layer {
    let mut l = Layer::new();
    for (k, v) in pairs {
        l.entry(k.to_string()).or_default().push(v.to_string());
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    Gaussian,
    Stable,
}

impl DriverKind {
    fn name(self) -> &'static str {
        match self {
            DriverKind::Gaussian => "gaussian",
            DriverKind::Stable => "stable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Gaussian,
    Stable,
    Escape,
}

impl Formula {
    fn name(self) -> &'static str {
        match self {
            Formula::Gaussian => "gaussian",
            Formula::Stable => "stable",
            Formula::Escape => "escape",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub driver: DriverKind,
    pub alphas: Vec<f64>,
    pub mus: Vec<f64>,
    pub betas: Vec<f64>,
    pub eps: f64,
    pub diffusion: f64,
    pub dim: usize,
    pub radius: f64,
    pub x0: Vec<f64>,
    /// `None` means the per-command default.
    pub ds: Option<f64>,
    pub trajectories: u64,
    pub max_steps: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub rel_tol: Option<f64>,
    pub workers: usize,
    pub formula: Option<Formula>,
    pub preset: Option<String>,
}

struct Resolver<'a> {
    layers: &'a [Layer],
}

impl Resolver<'_> {
    fn raw(&self, key: &str) -> Option<&Vec<String>> {
        self.layers.iter().find_map(|l| l.get(key))
    }

    fn parse<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
        s.parse()
            .map_err(|_| config(format!("invalid value {s:?} for {key}")))
    }

    fn list<T: std::str::FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>, CliError> {
        match self.raw(key) {
            Some(v) => v.iter().map(|s| Self::parse(key, s)).collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => Self::parse(key, &v[0]).map(Some),
            Some(_) => Err(config(format!("{key} takes a single value"))),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    /// `x0` and `x0-grid` resolve as a group from the first layer naming
    /// either.
    fn x0(&self) -> Result<Vec<f64>, CliError> {
        let Some(l) = self.layers.iter().find(|l| l.contains_key("x0") || l.contains_key("x0-grid")) else {
            return Ok(vec![0.0]);
        };
        let mut pts: Vec<f64> = match l.get("x0") {
            Some(v) => v.iter().map(|s| Self::parse("x0", s)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        if let Some(g) = l.get("x0-grid") {
            for spec in g {
                pts.extend(parse_grid(spec)?);
            }
        }
        Ok(pts)
    }
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || config(format!("x0-grid {spec:?}: expected lo:hi:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let h = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
        .collect())
}

impl ExperimentConfig {
    /// Resolves `layers` front to back; earlier layers win.
    pub fn from_layers(layers: &[Layer]) -> Result<Self, CliError> {
        let r = Resolver { layers };
        let driver = match r.get("driver", "gaussian".to_string())?.as_str() {
            "gaussian" => DriverKind::Gaussian,
            "stable" => DriverKind::Stable,
            other => return Err(config(format!("unknown driver {other:?} (expected gaussian or stable)"))),
        };
        let format = r
            .get("format", "csv".to_string())?
            .parse::<Format>()
            .map_err(config)?;
        let formula = match r.opt::<String>("formula")?.as_deref() {
            None => None,
            Some("gaussian") => Some(Formula::Gaussian),
            Some("stable") => Some(Formula::Stable),
            Some("escape") => Some(Formula::Escape),
            Some(other) => return Err(config(format!("unknown formula {other:?}"))),
        };
        let cfg = Self {
            driver,
            alphas: r.list("alpha", &[0.6])?,
            mus: r.list("mu", &[0.1])?,
            betas: r.list("beta", &[0.5])?,
            eps: r.get("eps", 1.0)?,
            diffusion: r.get("diffusion", 1.0)?,
            dim: r.get("dim", 1)?,
            radius: r.get("radius", 10.0)?,
            x0: r.x0()?,
            ds: r.opt("ds")?,
            trajectories: r.get("trajectories", DEFAULT_TRAJECTORIES)?,
            max_steps: r.get("max-steps", subexit_core::dynamics::DEFAULT_MAX_STEPS)?,
            seed: r.get("seed", DEFAULT_SEED)?,
            out: r.opt::<String>("out")?.map(PathBuf::from),
            format,
            rel_tol: r.opt("rel-tol")?,
            workers: r.get("workers", 0)?,
            formula,
            preset: None,
        };
        cfg.check_common()?;
        Ok(cfg)
    }

    fn check_common(&self) -> Result<(), CliError> {
        let finite_pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        finite_pos("radius", self.radius)?;
        finite_pos("eps", self.eps)?;
        finite_pos("diffusion", self.diffusion)?;
        if let Some(ds) = self.ds {
            finite_pos("ds", ds)?;
        }
        if self.dim == 0 {
            return Err(config("dim must be at least 1"));
        }
        if self.alphas.is_empty() || self.mus.is_empty() || self.betas.is_empty() || self.x0.is_empty() {
            return Err(config("alpha, mu, beta and x0 need at least one value"));
        }
        for &a in &self.alphas {
            for &m in &self.mus {
                TemperedStableParams::new(a, m).map_err(|e| config(e.to_string()))?;
            }
        }
        for &b in &self.betas {
            if !(b > 0.0 && b <= 2.0) {
                return Err(config(format!("beta must lie in (0, 2], got {b}")));
            }
        }
        if let Some(t) = self.rel_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config(format!("rel-tol must be non-negative, got {t}")));
            }
        }
        if self.x0.iter().any(|x| !x.is_finite()) {
            return Err(config("x0 must be finite"));
        }
        Ok(())
    }

    /// Simulations need every start point strictly inside the ball.
    pub fn check_strictly_inside(&self) -> Result<(), CliError> {
        for &x in &self.x0 {
            if x.abs() >= self.radius {
                return Err(config(format!(
                    "x0 = {x} is not strictly inside the domain of radius {}",
                    self.radius
                )));
            }
        }
        Ok(())
    }

    pub fn check_simulation(&self) -> Result<(), CliError> {
        self.check_strictly_inside()?;
        if self.trajectories < 2 {
            return Err(config("trajectories must be at least 2"));
        }
        if self.max_steps == 0 {
            return Err(config("max-steps must be positive"));
        }
        if self.driver == DriverKind::Stable {
            if let Some(&b) = self.betas.iter().find(|&&b| b >= 2.0) {
                return Err(config(format!(
                    "the stable driver needs beta in (0, 2), got {b}; use the gaussian driver for beta = 2"
                )));
            }
        }
        Ok(())
    }

    /// Start point on the first axis of the ball.
    pub fn point(&self, x: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        p[0] = x;
        p
    }

    /// Every parameter that affects results, plus the command and version.
    pub fn metadata(&self, command: &str, ds: Value) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("driver".into(), json!(self.driver.name()));
        m.insert("alpha".into(), json!(self.alphas));
        m.insert("mu".into(), json!(self.mus));
        m.insert("beta".into(), json!(self.betas));
        m.insert("eps".into(), json!(self.eps));
        m.insert("diffusion".into(), json!(self.diffusion));
        m.insert("dim".into(), json!(self.dim));
        m.insert("radius".into(), json!(self.radius));
        m.insert("x0".into(), json!(self.x0));
        m.insert("ds".into(), ds);
        m.insert("trajectories".into(), json!(self.trajectories));
        m.insert("max_steps".into(), json!(self.max_steps));
        m.insert("seed".into(), json!(self.seed));
        m.insert("rel_tol".into(), json!(self.rel_tol));
        if let Some(f) = self.formula {
            m.insert("formula".into(), json!(f.name()));
        }
        if let Some(p) = &self.preset {
            m.insert("preset".into(), json!(p));
        }
        m
    }
}
