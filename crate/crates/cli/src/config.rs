//! Run configuration: a `key = value` text file with flag overrides.

use std::path::{Path, PathBuf};

use rossler_core::integrator::IntegratorConfig;
use rossler_core::return_map::ScanGrid;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub event_tol: f64,
    pub grid_u_min: f64,
    pub grid_u_max: f64,
    pub grid_v_min: f64,
    pub grid_v_max: f64,
    pub grid_spacing: f64,
    pub half_width: f64,
    pub max_iter: usize,
    pub loop_radius: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ic = IntegratorConfig::default();
        Self {
            a: 0.468,
            b: 0.3,
            c: 4.615,
            rel_tol: ic.rel_tol,
            abs_tol: ic.abs_tol,
            max_step: ic.max_step,
            max_time: 200.0,
            event_tol: ic.event_tol,
            grid_u_min: -2.4,
            grid_u_max: 0.3,
            grid_v_min: -0.6,
            grid_v_max: 0.6,
            grid_spacing: 0.03,
            half_width: 0.05,
            max_iter: 200,
            loop_radius: 1e-3,
            out: PathBuf::from("run"),
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "a" => self.a = num(key, value)?,
            "b" => self.b = num(key, value)?,
            "c" => self.c = num(key, value)?,
            "rel_tol" => self.rel_tol = num(key, value)?,
            "abs_tol" => self.abs_tol = num(key, value)?,
            "max_step" => self.max_step = num(key, value)?,
            "max_time" => self.max_time = num(key, value)?,
            "event_tol" => self.event_tol = num(key, value)?,
            "grid_u_min" => self.grid_u_min = num(key, value)?,
            "grid_u_max" => self.grid_u_max = num(key, value)?,
            "grid_v_min" => self.grid_v_min = num(key, value)?,
            "grid_v_max" => self.grid_v_max = num(key, value)?,
            "grid_spacing" => self.grid_spacing = num(key, value)?,
            "half_width" => self.half_width = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "loop_radius" => self.loop_radius = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = num(key, value)?,
            "workers" => self.workers = Some(num(key, value)?),
            _ => return Err(ConfigError(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_into(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.parse_into(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("max_time", self.max_time),
            ("event_tol", self.event_tol),
            ("grid_spacing", self.grid_spacing),
            ("loop_radius", self.loop_radius),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError(format!("{k} must be positive, got {v}")));
            }
        }
        if self.workers == Some(0) {
            return Err(ConfigError("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_time: self.max_time,
            event_tol: self.event_tol,
        }
    }

    pub fn grid(&self) -> ScanGrid {
        ScanGrid {
            u_min: self.grid_u_min,
            u_max: self.grid_u_max,
            v_min: self.grid_v_min,
            v_max: self.grid_v_max,
            spacing: self.grid_spacing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.parse_into("# point\na = 0.2\n b=0.2 # inline\n\nc = 5.7\nworkers = 2\n")
            .unwrap();
        assert_eq!((cfg.a, cfg.b, cfg.c, cfg.workers), (0.2, 0.2, 5.7, Some(2)));
        assert!(cfg.parse_into("nope = 1").is_err());
        assert!(cfg.parse_into("a 1").is_err());
        assert!(cfg.parse_into("a = x").is_err());
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        let cfg = RunConfig {
            rel_tol: 0.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
