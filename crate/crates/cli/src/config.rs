//! Flat `key=value` run configuration with `[system]`, `[environment]` and
//! `[run]` sections. Every key can be overridden on the command line with
//! `--set KEY=VALUE`; a handful of frequent keys also have dedicated flags.

use std::path::PathBuf;

use spinbath::{EnvInitialState, SystemSpec};

/// Coupling-site selector: an explicit 1-based site or the chain center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteSel {
    Index(usize),
    Center,
}

/// Environment preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvKind {
    Vacuum,
    Thermal,
    Ground,
}

/// Engine selection; `Auto` resolves from the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineSel {
    Auto,
    Sector,
    Dense,
    Gaussian,
    Analytic,
}

/// Inclusive linear grid `min:max:count` used by the phase-diagram sweep.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    // [system]
    /// Chain length; 0 requests the thermodynamic limit (analytic engine).
    pub n: usize,
    pub j: f64,
    pub h: f64,
    pub omega: f64,
    /// Detuning from the Zeeman-shifted band center, `Delta_h = Delta - 2h`.
    pub delta_h: f64,
    pub m0: SiteSel,
    // [environment]
    pub env: EnvKind,
    pub beta: f64,
    pub h_prep: f64,
    // [run]
    pub engine: EngineSel,
    pub dt: f64,
    pub t_fin: f64,
    pub jobs: usize,
    pub out: PathBuf,
    pub emit_plot_script: bool,
    pub delta_h_grid: Grid,
    pub omega_grid: Grid,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 120,
            j: 1.0,
            h: 0.0,
            omega: 0.4,
            delta_h: 0.0,
            m0: SiteSel::Center,
            env: EnvKind::Vacuum,
            beta: 1.0,
            h_prep: 0.0,
            engine: EngineSel::Auto,
            dt: 0.05,
            t_fin: 20.0,
            jobs: 0,
            out: PathBuf::from("out"),
            emit_plot_script: false,
            delta_h_grid: Grid { min: -3.0, max: 3.0, count: 25 },
            omega_grid: Grid { min: 0.4, max: 0.4, count: 1 },
        }
    }
}

/// Configuration errors (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse().map_err(|_| bad(format!("{key}: expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| bad(format!("{key}: expected a nonnegative integer, got '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(format!("{key}: expected true/false, got '{v}'"))),
    }
}

fn parse_grid(key: &str, v: &str) -> Result<Grid, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!("{key}: expected min:max:count, got '{v}'")));
    }
    let grid = Grid {
        min: parse_f64(key, parts[0])?,
        max: parse_f64(key, parts[1])?,
        count: parse_usize(key, parts[2])?,
    };
    if grid.count == 0 {
        return Err(bad(format!("{key}: count must be positive")));
    }
    Ok(grid)
}

impl Config {
    /// Applies one `key=value` assignment (file line or `--set`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n" => self.n = parse_usize(key, value)?,
            "j" => self.j = parse_f64(key, value)?,
            "h" => self.h = parse_f64(key, value)?,
            "omega" => self.omega = parse_f64(key, value)?,
            "delta_h" => self.delta_h = parse_f64(key, value)?,
            "m0" => {
                self.m0 = if value == "center" {
                    SiteSel::Center
                } else {
                    SiteSel::Index(parse_usize(key, value)?)
                }
            }
            "env" => {
                self.env = match value {
                    "vacuum" => EnvKind::Vacuum,
                    "thermal" => EnvKind::Thermal,
                    "ground" => EnvKind::Ground,
                    _ => return Err(bad(format!("env: expected vacuum|thermal|ground, got '{value}'"))),
                }
            }
            "beta" => self.beta = parse_f64(key, value)?,
            "h_prep" => self.h_prep = parse_f64(key, value)?,
            "engine" => {
                self.engine = match value {
                    "auto" => EngineSel::Auto,
                    "sector" => EngineSel::Sector,
                    "dense" => EngineSel::Dense,
                    "gaussian" => EngineSel::Gaussian,
                    "analytic" => EngineSel::Analytic,
                    _ => {
                        return Err(bad(format!(
                            "engine: expected auto|sector|dense|gaussian|analytic, got '{value}'"
                        )))
                    }
                }
            }
            "dt" => self.dt = parse_f64(key, value)?,
            "t_fin" => self.t_fin = parse_f64(key, value)?,
            "jobs" => self.jobs = parse_usize(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "emit_plot_script" => self.emit_plot_script = parse_bool(key, value)?,
            "delta_h_grid" => self.delta_h_grid = parse_grid(key, value)?,
            "omega_grid" => self.omega_grid = parse_grid(key, value)?,
            _ => return Err(bad(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses a config file: `key = value` lines grouped under `[section]`
    /// headers; `#` starts a comment. Keys are globally unique, so the
    /// section headers are organizational only.
    pub fn apply_file(&mut self, text: &str, path: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !matches!(line, "[system]" | "[environment]" | "[run]") {
                    return Err(bad(format!("{path}:{}: unknown section {line}", lineno + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("{path}:{}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| bad(format!("{path}:{}: {}", lineno + 1, e.0)))?;
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` string from `--set`.
    pub fn apply_set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| bad(format!("--set expects KEY=VALUE, got '{assignment}'")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn is_tdl(&self) -> bool {
        self.n == 0
    }

    /// Builds the validated system specification. For the thermodynamic
    /// limit a nominal bulk-coupled chain carries the couplings and fields;
    /// the analytic engine only reads those scalars.
    pub fn system_spec(&self) -> Result<SystemSpec, ConfigError> {
        let n = if self.is_tdl() { 101 } else { self.n };
        let m0 = match self.m0 {
            SiteSel::Center => n / 2 + 1,
            SiteSel::Index(i) => i,
        };
        let delta = self.delta_h + 2.0 * self.h;
        SystemSpec::new(n, self.j, self.h, self.omega, delta, m0)
            .map_err(|e| bad(e.to_string()))
    }

    pub fn env_state(&self) -> EnvInitialState {
        match self.env {
            EnvKind::Vacuum => EnvInitialState::Vacuum,
            EnvKind::Thermal => EnvInitialState::Thermal { beta: self.beta },
            EnvKind::Ground => EnvInitialState::Ground { h_prep: self.h_prep },
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_fin / self.dt).round().max(1.0) as usize
    }

    /// Resolves `engine = auto`:
    /// thermodynamic limit -> analytic; edge coupling -> gaussian;
    /// vacuum -> sector; otherwise dense (subject to its size cap).
    pub fn resolve_engine(&self, spec: &SystemSpec) -> EngineSel {
        match self.engine {
            EngineSel::Auto => {
                if self.is_tdl() {
                    EngineSel::Analytic
                } else if spec.m0 == 1 {
                    EngineSel::Gaussian
                } else if self.env == EnvKind::Vacuum {
                    EngineSel::Sector
                } else {
                    EngineSel::Dense
                }
            }
            e => e,
        }
    }
}
