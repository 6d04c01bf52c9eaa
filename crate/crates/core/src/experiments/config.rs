//! Flat `key = value` configuration.
//!
//! ```text
//! # comment
//! [problem]
//! example = ex1
//! k = 1
//!
//! [regularization]
//! theta = 12
//! rule = discrepancy
//! ```
//!
//! Section headers only group keys; every key may appear once in the file.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::params::{RegConfig, RuleKind};

use super::examples::ExampleId;

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "HEATSOURCE_SEED";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub k: Option<f64>,
    pub horizon: Option<f64>,
    pub noiselv: Option<f64>,
    pub seed: Option<u64>,
    pub theta: Option<usize>,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
    pub bound: Option<f64>,
    pub relaxation: Option<u32>,
    pub tau: Option<f64>,
    pub rule: Option<RuleKind>,
    pub example: Option<ExampleId>,
    pub grid_x_cells: Option<usize>,
    pub grid_t_cells: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "line {line}: cannot parse '{value}' for key '{key}'"
        ))
    })
}

fn set<T>(slot: &mut Option<T>, value: T, key: &str, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(Error::Config(format!(
            "line {line}: key '{key}' given twice"
        )));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if !content.ends_with(']') || content.len() < 3 {
                return Err(Error::Config(format!(
                    "line {line}: malformed section header '{content}'"
                )));
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config(format!(
                "line {line}: expected 'key = value', got '{content}'"
            )));
        };
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        match key {
            "k" => set(&mut cfg.k, parse_value(key, value, line)?, key, line)?,
            "T" => set(&mut cfg.horizon, parse_value(key, value, line)?, key, line)?,
            "noiselv" => set(&mut cfg.noiselv, parse_value(key, value, line)?, key, line)?,
            "seed" => set(&mut cfg.seed, parse_value(key, value, line)?, key, line)?,
            "theta" => set(&mut cfg.theta, parse_value(key, value, line)?, key, line)?,
            "p" => set(&mut cfg.p, parse_value(key, value, line)?, key, line)?,
            "sigma" => set(&mut cfg.sigma, parse_value(key, value, line)?, key, line)?,
            "M" => set(&mut cfg.bound, parse_value(key, value, line)?, key, line)?,
            "N" => set(
                &mut cfg.relaxation,
                parse_value(key, value, line)?,
                key,
                line,
            )?,
            "tau" => set(&mut cfg.tau, parse_value(key, value, line)?, key, line)?,
            "rule" => set(&mut cfg.rule, value.parse()?, key, line)?,
            "example" => set(&mut cfg.example, value.parse()?, key, line)?,
            "grid_x_cells" => set(
                &mut cfg.grid_x_cells,
                parse_value(key, value, line)?,
                key,
                line,
            )?,
            "grid_t_cells" => set(
                &mut cfg.grid_t_cells,
                parse_value(key, value, line)?,
                key,
                line,
            )?,
            "out_dir" => set(&mut cfg.out_dir, PathBuf::from(value), key, line)?,
            other => return Err(Error::Config(format!("line {line}: unknown key '{other}'"))),
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn pick<T>(top: Option<T>, base: Option<T>) -> Option<T> {
    top.or(base)
}

impl RunConfig {
    /// Values of `top` win; unset keys fall back to `self`.
    pub fn overlaid_by(self, top: RunConfig) -> RunConfig {
        RunConfig {
            k: pick(top.k, self.k),
            horizon: pick(top.horizon, self.horizon),
            noiselv: pick(top.noiselv, self.noiselv),
            seed: pick(top.seed, self.seed),
            theta: pick(top.theta, self.theta),
            p: pick(top.p, self.p),
            sigma: pick(top.sigma, self.sigma),
            bound: pick(top.bound, self.bound),
            relaxation: pick(top.relaxation, self.relaxation),
            tau: pick(top.tau, self.tau),
            rule: pick(top.rule, self.rule),
            example: pick(top.example, self.example),
            grid_x_cells: pick(top.grid_x_cells, self.grid_x_cells),
            grid_t_cells: pick(top.grid_t_cells, self.grid_t_cells),
            out_dir: pick(top.out_dir, self.out_dir),
        }
    }

    /// Applies [`SEED_ENV`] when it is set.
    pub fn with_env(mut self) -> Result<RunConfig> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = Some(v.trim().parse().map_err(|_| {
                Error::Config(format!("{SEED_ENV} = '{v}' is not an unsigned integer"))
            })?);
        }
        Ok(self)
    }

    /// Regularization settings with defaults for unset keys.
    pub fn reg_config(&self) -> RegConfig {
        let d = RegConfig::default();
        RegConfig {
            p: self.p.unwrap_or(d.p),
            sigma: self.sigma.unwrap_or(d.sigma),
            bound: self.bound.unwrap_or(d.bound),
            theta: self.theta,
            relaxation: self.relaxation.unwrap_or(d.relaxation),
            tau: self.tau,
            rule: self.rule.unwrap_or(d.rule),
            ..d
        }
    }
}
