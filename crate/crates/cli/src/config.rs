//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ncvortex_core::moyal::MAX_ORDER;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("{key}: unknown key")]
    UnknownKey { key: String },
    #[error("{key}: given more than once")]
    Duplicate { key: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ConfigError {
    /// Dotted key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Invalid { key, .. } | Self::UnknownKey { key } | Self::Duplicate { key } => Some(key),
            _ => None,
        }
    }

    fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::Invalid { key: key.to_string(), message: message.into() }
    }
}

/// Names accepted under `tol.`.
pub const TOLERANCE_NAMES: [&str; 3] = ["linear", "profile", "schrodinger"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub winding: i64,
    pub grid_n: usize,
    pub half_extent: f64,
    pub profile_r_max: f64,
    pub profile_n_r: usize,
    pub theta: f64,
    pub order: usize,
    /// `profile` (radial relaxation), `linear` (order-k direct solve) and
    /// `schrodinger` (cross-validation solve).
    pub tolerances: BTreeMap<String, f64>,
    pub mask_radius: f64,
    pub decay_epsilon: f64,
    pub decay_window: (f64, f64),
    pub cross_window: (f64, f64),
    pub fock_enabled: bool,
    pub fock_dim: usize,
    pub fock_margin: usize,
    pub fock_theta: f64,
    pub fock_samples: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tolerances = [("linear", 1e-10), ("profile", 1e-10), ("schrodinger", 1e-10)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            winding: 1,
            grid_n: 512,
            half_extent: 16.0,
            profile_r_max: 16.0,
            profile_n_r: 4096,
            theta: 0.1,
            order: 1,
            tolerances,
            mask_radius: 1.0,
            decay_epsilon: 0.1,
            decay_window: (8.0, 14.0),
            cross_window: (2.0, 8.0),
            fock_enabled: true,
            fock_dim: 128,
            fock_margin: 16,
            fock_theta: 1.0,
            fock_samples: 200,
            output_dir: PathBuf::from("ncvortex-out"),
            seed: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| ConfigError::invalid(key, format!("cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::invalid(key, format!("expected true or false, got {value:?}"))),
    }
}

impl RunConfig {
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::BTreeSet::new();
        let mut r_max_given = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: idx + 1, message: format!("expected `key = value`, got {line:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: idx + 1, message: "empty key".into() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { key: key.to_string() });
            }
            cfg.set(key, value)?;
            r_max_given |= key == "profile.r_max";
        }
        if !r_max_given {
            cfg.profile_r_max = cfg.half_extent.max(16.0);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "vortex.winding" => self.winding = parse_num(key, value)?,
            "grid.n" => self.grid_n = parse_num(key, value)?,
            "grid.half_extent" => self.half_extent = parse_num(key, value)?,
            "profile.r_max" => self.profile_r_max = parse_num(key, value)?,
            "profile.n_r" => self.profile_n_r = parse_num(key, value)?,
            "series.theta" => self.theta = parse_num(key, value)?,
            "series.order" => self.order = parse_num(key, value)?,
            "mask.radius" => self.mask_radius = parse_num(key, value)?,
            "decay.epsilon" => self.decay_epsilon = parse_num(key, value)?,
            "decay.r_lo" => self.decay_window.0 = parse_num(key, value)?,
            "decay.r_hi" => self.decay_window.1 = parse_num(key, value)?,
            "cross.r_lo" => self.cross_window.0 = parse_num(key, value)?,
            "cross.r_hi" => self.cross_window.1 = parse_num(key, value)?,
            "fock.enabled" => self.fock_enabled = parse_bool(key, value)?,
            "fock.dim" => self.fock_dim = parse_num(key, value)?,
            "fock.margin" => self.fock_margin = parse_num(key, value)?,
            "fock.theta" => self.fock_theta = parse_num(key, value)?,
            "fock.samples" => self.fock_samples = parse_num(key, value)?,
            "output.dir" => {
                if value.is_empty() {
                    return Err(ConfigError::invalid(key, "empty path"));
                }
                self.output_dir = PathBuf::from(value);
            }
            "seed" => self.seed = parse_num(key, value)?,
            _ => match key.strip_prefix("tol.") {
                Some(name) if TOLERANCE_NAMES.contains(&name) => {
                    self.tolerances.insert(name.to_string(), parse_num(key, value)?);
                }
                _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = ConfigError::invalid;
        if !(0..=8).contains(&self.winding) {
            return Err(bad("vortex.winding", format!("must lie in 0..=8, got {}", self.winding)));
        }
        if self.grid_n < 32 || self.grid_n % 2 != 0 {
            return Err(bad("grid.n", format!("must be even and at least 32, got {}", self.grid_n)));
        }
        if !(self.half_extent.is_finite() && self.half_extent > 0.0) {
            return Err(bad("grid.half_extent", format!("must be positive, got {}", self.half_extent)));
        }
        if !(self.profile_r_max >= 12.0 && self.profile_r_max >= self.half_extent && self.profile_r_max.is_finite()) {
            return Err(bad("profile.r_max", format!("must be at least max(12, grid.half_extent), got {}", self.profile_r_max)));
        }
        if self.profile_n_r < 1024 {
            return Err(bad("profile.n_r", format!("must be at least 1024, got {}", self.profile_n_r)));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(bad("series.theta", format!("must be finite and non-negative, got {}", self.theta)));
        }
        if self.order > MAX_ORDER {
            return Err(bad("series.order", format!("must not exceed {MAX_ORDER}, got {}", self.order)));
        }
        for (name, &t) in &self.tolerances {
            let cap = if name == "schrodinger" { 1e-8 } else { 1e-4 };
            if !(t > 0.0 && t <= cap) {
                return Err(bad(&format!("tol.{name}"), format!("must lie in (0, {cap:e}], got {t}")));
            }
        }
        if !(self.mask_radius >= 0.0 && self.mask_radius < self.half_extent) {
            return Err(bad("mask.radius", format!("must lie in [0, grid.half_extent), got {}", self.mask_radius)));
        }
        if !(self.decay_epsilon > 0.0 && self.decay_epsilon < 1.0) {
            return Err(bad("decay.epsilon", format!("must lie in (0, 1), got {}", self.decay_epsilon)));
        }
        let (lo, hi) = self.decay_window;
        if !(lo > 0.0 && lo < hi) {
            return Err(bad("decay.r_lo", format!("window [{lo}, {hi}] is empty")));
        }
        if self.order > 0 && hi > self.half_extent - 1.0 {
            return Err(bad("decay.r_hi", format!("must stay one unit inside grid.half_extent, got {hi}")));
        }
        let (lo, hi) = self.cross_window;
        if !(lo >= 0.0 && lo < hi) {
            return Err(bad("cross.r_lo", format!("window [{lo}, {hi}] is empty")));
        }
        if hi > self.half_extent {
            return Err(bad("cross.r_hi", format!("exceeds grid.half_extent, got {hi}")));
        }
        if self.fock_margin < 1 {
            return Err(bad("fock.margin", "must be positive".to_string()));
        }
        if self.fock_dim < 8 || self.fock_dim < 2 * self.fock_margin + 2 {
            return Err(bad("fock.dim", format!("must be at least max(8, 2 fock.margin + 2), got {}", self.fock_dim)));
        }
        if !(self.fock_theta.is_finite() && self.fock_theta > 0.0) {
            return Err(bad("fock.theta", format!("must be positive, got {}", self.fock_theta)));
        }
        if self.fock_samples < 2 {
            return Err(bad("fock.samples", "need at least two samples".to_string()));
        }
        Ok(())
    }

    /// Every key with its value in a fixed order; the basis of the config hash.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("cross.r_hi", format!("{:?}", self.cross_window.1));
        put("cross.r_lo", format!("{:?}", self.cross_window.0));
        put("decay.epsilon", format!("{:?}", self.decay_epsilon));
        put("decay.r_hi", format!("{:?}", self.decay_window.1));
        put("decay.r_lo", format!("{:?}", self.decay_window.0));
        put("fock.dim", self.fock_dim.to_string());
        put("fock.enabled", self.fock_enabled.to_string());
        put("fock.margin", self.fock_margin.to_string());
        put("fock.samples", self.fock_samples.to_string());
        put("fock.theta", format!("{:?}", self.fock_theta));
        put("grid.half_extent", format!("{:?}", self.half_extent));
        put("grid.n", self.grid_n.to_string());
        put("mask.radius", format!("{:?}", self.mask_radius));
        put("output.dir", self.output_dir.display().to_string());
        put("profile.n_r", self.profile_n_r.to_string());
        put("profile.r_max", format!("{:?}", self.profile_r_max));
        put("seed", self.seed.to_string());
        put("series.order", self.order.to_string());
        put("series.theta", format!("{:?}", self.theta));
        for (name, t) in &self.tolerances {
            put(&format!("tol.{name}"), format!("{t:?}"));
        }
        put("vortex.winding", self.winding.to_string());
        s
    }

    /// SHA-256 of [`Self::canonical_text`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}
