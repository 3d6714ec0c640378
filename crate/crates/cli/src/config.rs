//! key=value defaults file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Values read from a config file; `None` means "not set, use the built-in".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub c: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub escape_radius: Option<f64>,
    pub r_max: Option<f64>,
    pub max_depth: Option<u32>,
    pub palette: Option<String>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub const KEYS: [&str; 11] = [
    "c",
    "max_iter",
    "tol",
    "escape_radius",
    "r_max",
    "max_depth",
    "palette",
    "out",
    "report",
    "stats",
    "workers",
];

fn num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse()
        .ok()
        .with_context(|| format!("line {line}: {key}: cannot parse '{v}'"))
}

fn real(key: &str, v: &str, line: usize) -> Result<f64> {
    let x: f64 = num(key, v, line)?;
    if !x.is_finite() {
        bail!("line {line}: {key}: must be finite");
    }
    Ok(x)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            bail!("line {line}: expected key=value, got '{body}'");
        };
        let (key, v) = (key.trim(), value.trim());
        match key {
            "c" => cfg.c = Some(real(key, v, line)?),
            "max_iter" => cfg.max_iter = Some(num(key, v, line)?),
            "tol" => cfg.tol = Some(real(key, v, line)?),
            "escape_radius" => cfg.escape_radius = Some(real(key, v, line)?),
            "r_max" => cfg.r_max = Some(real(key, v, line)?),
            "max_depth" => cfg.max_depth = Some(num(key, v, line)?),
            "palette" => cfg.palette = Some(v.to_string()),
            "out" => cfg.out = Some(PathBuf::from(v)),
            "report" => cfg.report = Some(PathBuf::from(v)),
            "stats" => cfg.stats = Some(PathBuf::from(v)),
            "workers" => cfg.workers = Some(num(key, v, line)?),
            _ => bail!("line {line}: unknown key '{key}' (known: {})", KEYS.join(", ")),
        }
    }
    Ok(cfg)
}

/// Built-in defaults when `path` is None.
pub fn load_config(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    parse_config(&text).with_context(|| format!("{}", path.display()))
}
