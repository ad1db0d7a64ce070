//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ness_efp::{AssemblyPath, ChainParams, FiniteVolumeSpec, HankelMode, QuadSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    File { path: String, line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
    #[error(transparent)]
    Params(#[from] ness_efp::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("format `{other}` is neither csv nor json")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathChoice {
    Direct,
    Structured,
}

impl FromStr for PathChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Self::Direct),
            "structured" => Ok(Self::Structured),
            other => Err(format!("path `{other}` is neither direct nor structured")),
        }
    }
}

impl fmt::Display for PathChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Structured => "structured",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub beta_left: f64,
    pub beta_right: f64,
    pub kappa: f64,
    pub x0: i64,
    pub sample_radius: usize,
    pub n_max: usize,
    pub quad_tol: f64,
    pub hankel_mode: HankelMode,
    pub path: PathChoice,
    pub oracle_window: usize,
    pub oracle_horizon: f64,
    pub oracle_samples: usize,
    pub points: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beta_left: 0.5,
            beta_right: 2.0,
            kappa: 0.2,
            x0: 1,
            sample_radius: 0,
            n_max: 20,
            quad_tol: 1e-12,
            hankel_mode: HankelMode::B,
            path: PathChoice::Structured,
            oracle_window: 300,
            oracle_horizon: 150.0,
            oracle_samples: 256,
            points: 257,
            format: Format::Csv,
            out: None,
        }
    }
}

pub const KEYS: [&str; 15] = [
    "beta_left",
    "beta_right",
    "kappa",
    "x0",
    "sample_radius",
    "n_max",
    "quad_tol",
    "hankel_mode",
    "path",
    "oracle_window",
    "oracle_horizon",
    "oracle_samples",
    "points",
    "format",
    "out",
];

fn parse<V: FromStr>(key: &str, raw: &str) -> Result<V, String>
where
    V::Err: fmt::Display,
{
    raw.parse::<V>().map_err(|e| format!("cannot parse `{raw}` for {key}: {e}"))
}

impl RunConfig {
    /// Apply one `key = value` pair.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        let raw = raw.trim();
        match key {
            "beta_left" => self.beta_left = parse(key, raw)?,
            "beta_right" => self.beta_right = parse(key, raw)?,
            "kappa" => self.kappa = parse(key, raw)?,
            "x0" => self.x0 = parse(key, raw)?,
            "sample_radius" => self.sample_radius = parse(key, raw)?,
            "n_max" => self.n_max = parse(key, raw)?,
            "quad_tol" => self.quad_tol = parse(key, raw)?,
            "hankel_mode" => self.hankel_mode = parse(key, raw)?,
            "path" => self.path = parse(key, raw)?,
            "oracle_window" => self.oracle_window = parse(key, raw)?,
            "oracle_horizon" => self.oracle_horizon = parse(key, raw)?,
            "oracle_samples" => self.oracle_samples = parse(key, raw)?,
            "points" => self.points = parse(key, raw)?,
            "format" => self.format = parse(key, raw)?,
            "out" => self.out = Some(PathBuf::from(raw)),
            other => return Err(format!("unknown key `{other}` (known: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::File { path: origin.to_string(), line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(k.trim(), v).map_err(err)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn params(&self) -> Result<ChainParams<f64>, ConfigError> {
        Ok(ChainParams::new(self.beta_left, self.beta_right, self.kappa, self.x0, self.sample_radius)?)
    }

    pub fn quad(&self) -> Result<QuadSpec<f64>, ConfigError> {
        let q = QuadSpec::with_tol(self.quad_tol);
        q.validate()?;
        Ok(q)
    }

    pub fn oracle(&self) -> Result<FiniteVolumeSpec<f64>, ConfigError> {
        Ok(FiniteVolumeSpec::new(self.oracle_window, self.oracle_horizon, self.oracle_samples, 0.5)?)
    }

    pub fn assembly(&self) -> AssemblyPath {
        match self.path {
            PathChoice::Direct => AssemblyPath::Direct,
            PathChoice::Structured => AssemblyPath::Structured(self.hankel_mode),
        }
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        self.quad()?;
        self.oracle()?;
        if !(1..=400).contains(&self.n_max) {
            return Err(ConfigError::Value { key: "n_max".into(), msg: format!("{} outside 1..=400", self.n_max) });
        }
        if self.points < 2 {
            return Err(ConfigError::Value { key: "points".into(), msg: "need at least 2 points".into() });
        }
        Ok(())
    }
}
