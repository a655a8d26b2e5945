use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Objective, MAX_ENUMERATION_CELLS};
use crate::spectral::{Scheme, SystemParams};

/// How a record's coalition structure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Budgeted coalition-formation dynamics.
    Formation,
    /// Every cell alone.
    Singletons,
    /// Full pilot reuse.
    Grand,
    /// Best partition by enumeration.
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Formation,
        Method::Singletons,
        Method::Grand,
        Method::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Formation => "formation",
            Method::Singletons => "singletons",
            Method::Grand => "grand",
            Method::Exhaustive => "exhaustive",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Sweep configuration. Defaults reproduce the reference setup: S=400,
/// 5 dB SNR, pathloss exponent 3, 10 pilots per cell, budget 100 and
/// 25 BS/km².
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cells: usize,
    /// Base stations per km².
    pub density: f64,
    pub pilots_per_cell: u32,
    pub symbols: u32,
    pub snr_db: f64,
    pub alpha: f64,
    pub antennas: Vec<u32>,
    pub schemes: Vec<Scheme>,
    /// Searching budget given to every cell.
    pub budget: u32,
    pub trials: usize,
    pub mu_samples: usize,
    pub master_seed: u64,
    pub objective: Objective,
    pub methods: Vec<Method>,
    pub workers: usize,
    /// Record wall time per record; off by default so output is reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cells: 7,
            density: 25.0,
            pilots_per_cell: 10,
            symbols: 400,
            snr_db: 5.0,
            alpha: 3.0,
            antennas: vec![100, 200, 300, 400, 500],
            schemes: Scheme::ALL.to_vec(),
            budget: 100,
            trials: 10,
            mu_samples: 10_000,
            master_seed: 1,
            objective: Objective::TotalSe,
            methods: Method::ALL.to_vec(),
            workers: 1,
            timing: false,
        }
    }
}

fn list<T: FromStr<Err = E>, E: ToString>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::InvalidParameter(format!("{s:?}: {}", e.to_string())))
        })
        .collect()
}

fn scalar<T: FromStr<Err = E>, E: ToString>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::InvalidParameter(format!("{key}={value:?}: {}", e.to_string())))
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Sets one field from its `key=value` spelling.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "cells" => self.cells = scalar(key, value)?,
            "density" => self.density = scalar(key, value)?,
            "pilots_per_cell" => self.pilots_per_cell = scalar(key, value)?,
            "symbols" => self.symbols = scalar(key, value)?,
            "snr_db" => self.snr_db = scalar(key, value)?,
            "alpha" => self.alpha = scalar(key, value)?,
            "antennas" => self.antennas = list(value)?,
            "schemes" => self.schemes = list(value)?,
            "budget" => self.budget = scalar(key, value)?,
            "trials" => self.trials = scalar(key, value)?,
            "mu_samples" => self.mu_samples = scalar(key, value)?,
            "master_seed" => self.master_seed = scalar(key, value)?,
            "objective" => self.objective = value.parse()?,
            "methods" => self.methods = list(value)?,
            "workers" => self.workers = scalar(key, value)?,
            "timing" => self.timing = scalar(key, value)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` file on top of the defaults. Blank lines
    /// and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(idx + 1, format!("expected key=value, got {line:?}"))
            })?;
            config
                .set(k, v)
                .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        }
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cells = {}", self.cells);
        let _ = writeln!(out, "density = {}", self.density);
        let _ = writeln!(out, "pilots_per_cell = {}", self.pilots_per_cell);
        let _ = writeln!(out, "symbols = {}", self.symbols);
        let _ = writeln!(out, "snr_db = {}", self.snr_db);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "antennas = {}", join(&self.antennas));
        let _ = writeln!(out, "schemes = {}", join(&self.schemes));
        let _ = writeln!(out, "budget = {}", self.budget);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "mu_samples = {}", self.mu_samples);
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "objective = {}", self.objective.as_str());
        let methods: Vec<&str> = self.methods.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(out, "methods = {}", methods.join(","));
        let _ = writeln!(out, "workers = {}", self.workers);
        let _ = writeln!(out, "timing = {}", self.timing);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidParameter(m));
        if self.pilots_per_cell == 0 {
            return invalid("pilots_per_cell must be >= 1".into());
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1".into());
        }
        if self.mu_samples == 0 {
            return invalid("mu_samples must be >= 1".into());
        }
        if self.workers == 0 {
            return invalid("workers must be >= 1".into());
        }
        if self.antennas.is_empty() || self.antennas.contains(&0) {
            return invalid("antennas must be a non-empty list of counts >= 1".into());
        }
        if self.schemes.is_empty() || self.methods.is_empty() {
            return invalid("schemes and methods must be non-empty".into());
        }
        if self.methods.contains(&Method::Exhaustive) && self.cells > MAX_ENUMERATION_CELLS {
            return Err(Error::TooManyCells {
                cells: self.cells,
                max: MAX_ENUMERATION_CELLS,
            });
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return invalid(format!("density must be positive, got {}", self.density));
        }
        for &m in &self.antennas {
            self.params(m)?;
        }
        // Exclusion radius side/1000 must stay below side/(2L).
        if self.cells == 0 || self.cells >= 500 {
            return invalid(format!("cells must lie in 1..500, got {}", self.cells));
        }
        Ok(())
    }

    pub fn params(&self, antennas: u32) -> Result<SystemParams> {
        SystemParams::from_db(
            antennas,
            self.pilots_per_cell,
            self.symbols,
            self.snr_db,
            self.cells,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_text(&c.to_text()).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn parses_overrides_and_comments() {
        let c = ExperimentConfig::from_text(
            "# small run\ncells = 4\nantennas = 50, 80\nschemes = zfc\nmethods = formation,grand # no search\nobjective = per-cell-mean\n",
        )
        .unwrap();
        assert_eq!(c.cells, 4);
        assert_eq!(c.antennas, vec![50, 80]);
        assert_eq!(c.schemes, vec![Scheme::Zfc]);
        assert_eq!(c.methods, vec![Method::Formation, Method::Grand]);
        assert_eq!(c.objective, Objective::PerCellMean);
        assert_eq!(c.budget, 100);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_text("cells 4").is_err());
        assert!(ExperimentConfig::from_text("colour = red").is_err());
        assert!(ExperimentConfig::from_text("schemes = mmse").is_err());
        let mut c = ExperimentConfig {
            cells: 13,
            ..ExperimentConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::TooManyCells { .. })));
        c.methods = vec![Method::Formation];
        c.validate().unwrap();
        c.trials = 0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            antennas: vec![0],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            pilots_per_cell: 0,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
