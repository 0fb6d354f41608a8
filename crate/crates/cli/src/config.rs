//! Experiment configuration: top-level defaults plus one table per run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use frenet_ife::ife::MAX_DEGREE;
use frenet_ife::{XiFamily, DEFAULT_SIGMA0, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Example {
    #[serde(rename = "ex1-projection")]
    Ex1Projection,
    #[serde(rename = "ex1-solve")]
    Ex1Solve,
    #[serde(rename = "ex2-solve")]
    Ex2Solve,
    #[serde(rename = "ex3-p-sweep")]
    Ex3PSweep,
    #[serde(rename = "conditioning")]
    Conditioning,
}

impl Example {
    pub const ALL: [(&'static str, Example); 5] = [
        ("ex1-projection", Example::Ex1Projection),
        ("ex1-solve", Example::Ex1Solve),
        ("ex2-solve", Example::Ex2Solve),
        ("ex3-p-sweep", Example::Ex3PSweep),
        ("conditioning", Example::Conditioning),
    ];

    pub fn id(self) -> &'static str {
        Example::ALL.iter().find(|(_, e)| *e == self).map(|(s, _)| *s).expect("every example has an id")
    }

    fn parse(id: &str) -> Option<Example> {
        Example::ALL.iter().find(|(s, _)| *s == id).map(|(_, e)| *e)
    }

    fn default_meshes(self) -> Vec<usize> {
        match self {
            Example::Ex1Projection | Example::Ex1Solve => vec![20, 40, 60, 80, 100, 120],
            Example::Ex2Solve => vec![10, 20, 30, 40, 50, 60],
            Example::Ex3PSweep => vec![5],
            Example::Conditioning => vec![],
        }
    }

    fn default_degrees(self) -> Vec<usize> {
        match self {
            Example::Ex3PSweep => (1..=6).collect(),
            Example::Conditioning => (2..=5).collect(),
            _ => vec![1, 2, 3],
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Legendre,
    Monomial,
}

impl From<Family> for XiFamily {
    fn from(f: Family) -> XiFamily {
        match f {
            Family::Legendre => XiFamily::Legendre,
            Family::Monomial => XiFamily::Monomial,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    example: String,
    degrees: Option<Vec<usize>>,
    meshes: Option<Vec<usize>>,
    beta: Option<Vec<[f64; 2]>>,
    sigma0: Option<f64>,
    tolerance: Option<f64>,
    volume_points: Option<usize>,
    edge_points: Option<usize>,
    family: Option<Family>,
    epsilons: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    out: Option<PathBuf>,
    timings: Option<bool>,
    #[serde(flatten)]
    sections: BTreeMap<String, RawSection>,
}

/// One experiment with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    pub example: Example,
    pub degrees: Vec<usize>,
    pub meshes: Vec<usize>,
    /// `(beta_minus, beta_plus)` pairs.
    pub beta: Vec<[f64; 2]>,
    pub sigma0: f64,
    pub tolerance: f64,
    pub volume_points: Option<usize>,
    pub edge_points: Option<usize>,
    pub family: Family,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub out: Option<PathBuf>,
    /// Record wall-clock solve times; `false` writes zeros so that reruns
    /// reproduce the tables byte for byte.
    pub timings: bool,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_error(section: &str, field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("[{section}] {field}: {msg}"))
}

fn non_empty<T>(section: &str, field: &str, v: Vec<T>) -> Result<Vec<T>, ConfigError> {
    if v.is_empty() {
        Err(field_error(section, field, "list must not be empty"))
    } else {
        Ok(v)
    }
}

fn resolve(name: &str, raw: RawSection) -> Result<Section, ConfigError> {
    let ids: Vec<&str> = Example::ALL.iter().map(|(s, _)| *s).collect();
    let example = Example::parse(&raw.example)
        .ok_or_else(|| field_error(name, "example", format!("unknown id {:?}, expected one of {}", raw.example, ids.join(", "))))?;
    let degrees = non_empty(name, "degrees", raw.degrees.unwrap_or_else(|| example.default_degrees()))?;
    if let Some(m) = degrees.iter().find(|&&m| m == 0 || m > MAX_DEGREE) {
        return Err(field_error(name, "degrees", format!("{m} is outside 1..={MAX_DEGREE}")));
    }
    let meshes = match example {
        Example::Conditioning => raw.meshes.unwrap_or_default(),
        _ => non_empty(name, "meshes", raw.meshes.unwrap_or_else(|| example.default_meshes()))?,
    };
    if meshes.contains(&0) {
        return Err(field_error(name, "meshes", "mesh sizes must be positive"));
    }
    let beta = non_empty(name, "beta", raw.beta.unwrap_or_else(|| vec![[1.0, 10.0]]))?;
    if let Some(b) = beta.iter().find(|b| !(b[0] > 0.0 && b[1] > 0.0)) {
        return Err(field_error(name, "beta", format!("coefficients must be positive, got {b:?}")));
    }
    let sigma0 = raw.sigma0.unwrap_or(DEFAULT_SIGMA0);
    if !(sigma0 > 0.0) {
        return Err(field_error(name, "sigma0", format!("must be positive, got {sigma0}")));
    }
    let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(field_error(name, "tolerance", format!("must lie in (0, 1), got {tolerance}")));
    }
    for (field, v) in [("volume_points", raw.volume_points), ("edge_points", raw.edge_points)] {
        if v == Some(0) {
            return Err(field_error(name, field, "must be positive"));
        }
    }
    let epsilons = match example {
        Example::Conditioning => {
            let eps = non_empty(name, "epsilons", raw.epsilons.unwrap_or_else(|| (1..=6).map(|k| 10f64.powi(-k)).collect()))?;
            if let Some(e) = eps.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
                return Err(field_error(name, "epsilons", format!("{e} is outside (0, 0.5)")));
            }
            eps
        }
        _ => raw.epsilons.unwrap_or_default(),
    };
    Ok(Section {
        name: name.to_string(),
        example,
        degrees,
        meshes,
        beta,
        sigma0,
        tolerance,
        volume_points: raw.volume_points,
        edge_points: raw.edge_points,
        family: raw.family.unwrap_or(Family::Legendre),
        epsilons,
    })
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        if raw.sections.is_empty() {
            return Err(ConfigError("no experiment sections".into()));
        }
        let sections = raw.sections.into_iter().map(|(name, s)| resolve(&name, s)).collect::<Result<_, _>>()?;
        Ok(Config { out: raw.out, timings: raw.timings.unwrap_or(true), sections })
    }
}
