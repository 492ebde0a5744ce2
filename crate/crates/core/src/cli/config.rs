//! Flat `key = value` configuration files.
//!
//! Blank lines and everything after `#` are ignored. Keys are case-sensitive
//! and may appear once.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::constitutive::MaterialParams;

/// Environment variable that replaces the default of every check tolerance
/// not set in the config file.
pub const TOL_ENV: &str = "HOMSTRESS_TOL";

const KNOWN_KEYS: &[&str] = &[
    "mu",
    "mu_tilde",
    "kappa",
    "a",
    "s",
    "k",
    "root_index",
    "m",
    "dims",
    "plane_offset",
    "det_target",
    "tol_stress",
    "tol_continuity",
    "tol_traction",
    "scan",
    "scan_points",
    "scan_a_min",
    "scan_a_max",
    "probe_points",
    "output_dir",
    "format",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "config line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "config key `{k}`: {}", self.message),
            (None, None) => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn key_error(key: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, key: Some(key.to_string()), message: message.into() }
}

/// Raw key-value pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError { line: Some(line), key: None, message: "expected `key = value`".into() });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(key_error(key, Some(line), "unknown key"));
            }
            if value.is_empty() {
                return Err(key_error(key, Some(line), "missing value"));
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (line, value.to_string())) {
                return Err(key_error(key, Some(line), format!("duplicate key (first set on line {first})")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn parse_with<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                parse(v).map(Some).ok_or_else(|| key_error(key, Some(*line), format!("expected {what}, got `{v}`")))
            }
        }
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, |v| v.parse::<f64>().ok().filter(|x| x.is_finite()), "a finite number")
    }

    pub fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, |v| v.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0), "a positive number")
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parse_with(key, |v| v.parse::<usize>().ok(), "a non-negative integer")
    }

    pub fn triple(&self, key: &str) -> Result<Option<[f64; 3]>, ConfigError> {
        self.parse_with(
            key,
            |v| {
                let xs: Vec<f64> = v
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0))
                    .collect::<Option<_>>()?;
                <[f64; 3]>::try_from(xs).ok()
            },
            "three positive numbers",
        )
    }

    pub fn required<T>(&self, key: &str, value: Result<Option<T>, ConfigError>) -> Result<T, ConfigError> {
        value?.ok_or_else(|| key_error(key, None, "required key is missing"))
    }
}

/// Pass/fail thresholds applied by the commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Stress-equality residual, relative to `max(1, |β₀|)`.
    pub stress: f64,
    /// Vertex displacement continuity.
    pub continuity: f64,
    /// Traction jump, relative to `1 + max ‖σ‖`.
    pub traction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { stress: 1e-10, continuity: 1e-12, traction: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Beta1,
    Admissibility,
    Segment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub material: MaterialParams,
    pub a: Option<f64>,
    pub s: Option<f64>,
    pub k: Option<f64>,
    pub root_index: usize,
    pub m: usize,
    pub dims: [f64; 3],
    pub plane_offset: Option<f64>,
    pub det_target: Option<f64>,
    pub tolerances: Tolerances,
    pub scan: ScanKind,
    pub scan_points: usize,
    pub scan_a_range: (f64, f64),
    pub probe_points: usize,
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl AnalysisConfig {
    /// Parses `text`; `env_tol` is the value of [`TOL_ENV`], if set.
    pub fn parse(text: &str, env_tol: Option<&str>) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let material = MaterialParams {
            mu: raw.required("mu", raw.positive("mu"))?,
            mu_tilde: raw.required("mu_tilde", raw.positive("mu_tilde"))?,
            kappa: raw.required("kappa", raw.positive("kappa"))?,
        };

        let default_tol = match env_tol {
            None => None,
            Some(v) => {
                Some(v.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0).ok_or_else(|| ConfigError {
                    line: None,
                    key: Some(TOL_ENV.into()),
                    message: format!("expected a positive number, got `{v}`"),
                })?)
            }
        };
        let base = Tolerances::default();
        let tol = |key: &str, fallback: f64| -> Result<f64, ConfigError> {
            Ok(raw.positive(key)?.or(default_tol).unwrap_or(fallback))
        };
        let tolerances = Tolerances {
            stress: tol("tol_stress", base.stress)?,
            continuity: tol("tol_continuity", base.continuity)?,
            traction: tol("tol_traction", base.traction)?,
        };

        let scan = match raw.get_str("scan") {
            None | Some("beta1") => ScanKind::Beta1,
            Some("admissibility") => ScanKind::Admissibility,
            Some("segment") => ScanKind::Segment,
            Some(other) => {
                return Err(key_error("scan", None, format!("expected beta1, admissibility or segment, got `{other}`")))
            }
        };
        let format = match raw.get_str("format") {
            None => OutputFormat::Json,
            Some(v) => v.parse().map_err(|e: String| key_error("format", None, e))?,
        };
        let m = raw.count("m")?.unwrap_or(2);
        if m == 0 {
            return Err(key_error("m", None, "must be at least 1"));
        }
        let scan_a_range = (raw.positive("scan_a_min")?.unwrap_or(0.5), raw.positive("scan_a_max")?.unwrap_or(2.0));

        Ok(AnalysisConfig {
            material,
            a: raw.positive("a")?,
            s: raw.real("s")?,
            k: raw.positive("k")?,
            root_index: raw.count("root_index")?.unwrap_or(0),
            m,
            dims: raw.triple("dims")?.unwrap_or([1.0; 3]),
            plane_offset: raw.real("plane_offset")?,
            det_target: raw.positive("det_target")?,
            tolerances,
            scan,
            scan_points: raw.count("scan_points")?.unwrap_or(1001),
            scan_a_range,
            probe_points: raw.count("probe_points")?.unwrap_or(1001),
            output_dir: raw.get_str("output_dir").map(PathBuf::from),
            format,
        })
    }

    pub fn load(path: &Path, env_tol: Option<&str>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        AnalysisConfig::parse(&text, env_tol)
    }

    pub fn require_a(&self) -> Result<f64, ConfigError> {
        self.a.ok_or_else(|| key_error("a", None, "required key is missing"))
    }

    pub fn require_s(&self) -> Result<f64, ConfigError> {
        self.s.ok_or_else(|| key_error("s", None, "required key is missing"))
    }

    /// Interface plane, defaulting to the lattice plane nearest the mid-height.
    pub fn plane_offset(&self) -> f64 {
        self.plane_offset.unwrap_or_else(|| (self.m / 2) as f64 * self.dims[1] / self.m as f64)
    }
}
