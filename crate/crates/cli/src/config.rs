//! Flat `key = value` run configuration shared by the config file, the
//! command-line flags and the parameter echo in every output header.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    Exact,
    Euler,
}

impl FromStr for SchemeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(SchemeArg::Exact),
            "euler" => Ok(SchemeArg::Euler),
            _ => Err(format!("unknown scheme '{s}' (exact or euler)")),
        }
    }
}

impl fmt::Display for SchemeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeArg::Exact => "exact",
            SchemeArg::Euler => "euler",
        })
    }
}

/// Every recognized key, in echo order.
pub const KEYS: &[&str] = &[
    "gamma", "omega0", "temp", "hbar", "kb", "mass", "omega-max", "cutoff", "modes", "grid", "lambda-max",
    "tau-max", "traj", "steps", "dt", "scheme", "seed", "format", "out", "dump",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub gamma: Option<Vec<f64>>,
    pub omega0: Option<f64>,
    pub temp: Option<f64>,
    pub hbar: Option<f64>,
    pub kb: Option<f64>,
    pub mass: Option<f64>,
    pub omega_max: Option<f64>,
    pub cutoff: Option<f64>,
    pub modes: Option<usize>,
    pub grid: Option<usize>,
    pub lambda_max: Option<f64>,
    pub tau_max: Option<f64>,
    pub traj: Option<usize>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub scheme: Option<SchemeArg>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    /// Trajectory CSV for the first microbath realization.
    pub dump: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("{key}: cannot parse '{value}': {e}")))
}

fn finite(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = parse(key, value)?;
    if !v.is_finite() {
        return Err(CliError::Validation(format!("{key} must be finite")));
    }
    Ok(v)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "gamma" => {
                let list = value
                    .split(',')
                    .map(|t| finite(key, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if list.is_empty() {
                    return Err(CliError::Validation("gamma list is empty".into()));
                }
                self.gamma = Some(list);
            }
            "omega0" => self.omega0 = Some(finite(key, value)?),
            "temp" => self.temp = Some(finite(key, value)?),
            "hbar" => self.hbar = Some(finite(key, value)?),
            "kb" => self.kb = Some(finite(key, value)?),
            "mass" => self.mass = Some(finite(key, value)?),
            "omega-max" => self.omega_max = Some(finite(key, value)?),
            "cutoff" => self.cutoff = Some(finite(key, value)?),
            "modes" => self.modes = Some(parse(key, value)?),
            "grid" => self.grid = Some(parse(key, value)?),
            "lambda-max" => self.lambda_max = Some(finite(key, value)?),
            "tau-max" => self.tau_max = Some(finite(key, value)?),
            "traj" => self.traj = Some(parse(key, value)?),
            "steps" => self.steps = Some(parse(key, value)?),
            "dt" => self.dt = Some(finite(key, value)?),
            "scheme" => self.scheme = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "format" => self.format = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "dump" => self.dump = Some(PathBuf::from(value.trim())),
            _ => return Err(CliError::Validation(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Re-reads the parameter block of an emitted CSV header (`# key = value`).
    pub fn parse_header(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("# ") else {
                if line.starts_with('#') {
                    continue;
                }
                break;
            };
            if let Some((k, v)) = rest.split_once(" = ") {
                if KEYS.contains(&k) {
                    cfg.set(k, v)?;
                }
            }
        }
        Ok(cfg)
    }

    /// Values set in `other` win.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(gamma, omega0, temp, hbar, kb, mass, omega_max, cutoff, modes, grid, lambda_max, tau_max, traj, steps, dt, scheme, seed, format, out, dump);
        self
    }

    /// `(key, value)` for every set field, in [`KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        push("gamma", self.gamma.as_deref().map(join));
        push("omega0", self.omega0.map(|v| v.to_string()));
        push("temp", self.temp.map(|v| v.to_string()));
        push("hbar", self.hbar.map(|v| v.to_string()));
        push("kb", self.kb.map(|v| v.to_string()));
        push("mass", self.mass.map(|v| v.to_string()));
        push("omega-max", self.omega_max.map(|v| v.to_string()));
        push("cutoff", self.cutoff.map(|v| v.to_string()));
        push("modes", self.modes.map(|v| v.to_string()));
        push("grid", self.grid.map(|v| v.to_string()));
        push("lambda-max", self.lambda_max.map(|v| v.to_string()));
        push("tau-max", self.tau_max.map(|v| v.to_string()));
        push("traj", self.traj.map(|v| v.to_string()));
        push("steps", self.steps.map(|v| v.to_string()));
        push("dt", self.dt.map(|v| v.to_string()));
        push("scheme", self.scheme.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("format", self.format.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("dump", self.dump.as_ref().map(|p| p.display().to_string()));
        out
    }

    pub fn to_text(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
