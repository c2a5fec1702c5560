//! Tunables shared by all subcommands, layered as
//! flags > `SUPERCRIT_*` environment > config file > built-in defaults.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use supercrit::channels::{DEFAULT_ALPHA_INV, ELECTRON_REST_KEV};
use supercrit::report::Units;
use supercrit::spectra::{SolverConfig, ThetaVariant};

use crate::CliError;

pub const ENV_PREFIX: &str = "SUPERCRIT_";

/// Keys accepted in the environment (upper-cased, with the prefix) and in
/// config files.
pub const KEYS: [&str; 9] = [
    "alpha_inv",
    "nmax",
    "format",
    "theta_variant",
    "units",
    "integer_z",
    "electron_rest_kev",
    "bisect_tol",
    "scan_points",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    /// Aligned plain text; only the table subcommand renders it.
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format '{other}' (expected csv, json or text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub alpha_inv: f64,
    /// None means the subcommand's own default.
    pub nmax: Option<u32>,
    pub format: Format,
    pub units: Units,
    pub integer_z: bool,
    pub electron_rest_kev: f64,
    pub solver: SolverConfig,
}

/// Values given on the command line, all optional.
#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub alpha_inv: Option<f64>,
    pub nmax: Option<u32>,
    pub format: Option<String>,
    pub theta_variant: Option<String>,
    pub units: Option<String>,
    pub integer_z: bool,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; unknown keys are an error so typos do not pass silently.
pub fn parse_config(text: &str, origin: &str) -> Result<HashMap<String, String>, CliError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected 'key = value', got '{line}'", i + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "{origin}:{}: unknown key '{}' (known: {})",
                i + 1,
                k.trim(),
                KEYS.join(", ")
            )));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

fn env_layer(env: &HashMap<String, String>) -> HashMap<String, String> {
    env.iter()
        .filter_map(|(k, v)| {
            let key = normalize_key(k.strip_prefix(ENV_PREFIX)?);
            KEYS.contains(&key.as_str()).then(|| (key, v.clone()))
        })
        .collect()
}

struct Layers {
    env: HashMap<String, String>,
    config: HashMap<String, String>,
}

impl Layers {
    /// The first of env, config that has `key`, with a label for messages.
    fn lookup(&self, key: &str) -> Option<(String, &str)> {
        if let Some(v) = self.env.get(key) {
            return Some((format!("{ENV_PREFIX}{}", key.to_ascii_uppercase()), v));
        }
        self.config.get(key).map(|v| (format!("config key {key}"), v.as_str()))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.lookup(key) {
            None => Ok(None),
            Some((origin, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("{origin}: invalid value '{v}': {e}"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.lookup(key) {
            None => Ok(false),
            Some((origin, v)) => match v.trim().to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" | "" => Ok(false),
                other => Err(CliError::Usage(format!("{origin}: expected true or false, got '{other}'"))),
            },
        }
    }
}

fn parse_flag<T: FromStr>(flag: &str, v: &Option<String>) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    v.as_deref()
        .map(|s| s.parse().map_err(|e| CliError::Usage(format!("--{flag}: {e}"))))
        .transpose()
}

pub fn resolve(
    flags: &FlagValues,
    env: &HashMap<String, String>,
    config: HashMap<String, String>,
) -> Result<Settings, CliError> {
    let layers = Layers { env: env_layer(env), config };
    let defaults = SolverConfig::default();
    let alpha_inv = match flags.alpha_inv {
        Some(v) => v,
        None => layers.parsed("alpha_inv")?.unwrap_or(DEFAULT_ALPHA_INV),
    };
    if !(alpha_inv.is_finite() && alpha_inv > 0.0) {
        return Err(CliError::Usage(format!("alpha_inv must be positive, got {alpha_inv}")));
    }
    let nmax = match flags.nmax {
        Some(v) => Some(v),
        None => layers.parsed("nmax")?,
    };
    let format = match parse_flag("format", &flags.format)? {
        Some(f) => f,
        None => layers.parsed("format")?.unwrap_or(Format::Csv),
    };
    let units = match parse_flag("units", &flags.units)? {
        Some(u) => u,
        None => layers.parsed("units")?.unwrap_or_default(),
    };
    let theta_variant = match parse_flag("theta-variant", &flags.theta_variant)? {
        Some(t) => t,
        None => layers.parsed("theta_variant")?.unwrap_or(ThetaVariant::default()),
    };
    let integer_z = flags.integer_z || layers.flag("integer_z")?;
    let electron_rest_kev = layers.parsed("electron_rest_kev")?.unwrap_or(ELECTRON_REST_KEV);
    if !(electron_rest_kev.is_finite() && electron_rest_kev > 0.0) {
        return Err(CliError::Usage(format!("electron_rest_kev must be positive, got {electron_rest_kev}")));
    }
    let solver = SolverConfig {
        n_max: defaults.n_max,
        bisect_tol: layers.parsed("bisect_tol")?.unwrap_or(defaults.bisect_tol),
        scan_points: layers.parsed("scan_points")?.unwrap_or(defaults.scan_points),
        theta_variant,
    };
    solver.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Settings {
        alpha_inv,
        nmax,
        format,
        units,
        integer_z,
        electron_rest_kev,
        solver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = parse_config("# comment\nalpha-inv = 137.04\n\nNMAX=3 # trailing\n", "t").unwrap();
        assert_eq!(c["alpha_inv"], "137.04");
        assert_eq!(c["nmax"], "3");
        assert!(parse_config("bogus = 1", "t").is_err());
        assert!(parse_config("no equals sign", "t").is_err());
    }

    #[test]
    fn layering_order() {
        let env: HashMap<_, _> = [("SUPERCRIT_ALPHA_INV".to_string(), "137.5".to_string())].into();
        let config = parse_config("alpha_inv = 137.04\nnmax = 7", "t").unwrap();
        let s = resolve(&FlagValues::default(), &env, config.clone()).unwrap();
        assert_eq!(s.alpha_inv, 137.5);
        assert_eq!(s.nmax, Some(7));
        let flags = FlagValues {
            alpha_inv: Some(140.0),
            ..Default::default()
        };
        assert_eq!(resolve(&flags, &env, config).unwrap().alpha_inv, 140.0);
        let s = resolve(&FlagValues::default(), &HashMap::new(), HashMap::new()).unwrap();
        assert_eq!(s.alpha_inv, DEFAULT_ALPHA_INV);
        assert_eq!(s.nmax, None);
    }
}
