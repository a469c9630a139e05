//! Run configuration: a JSON file plus flag overrides.

use std::path::PathBuf;

use adeheat::filtration::FiltrationConfig;
use adeheat::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub filtration: FiltrationConfig,
    pub alpha: f64,
    pub beta: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    /// Times for table commands.
    pub t_grid: Vec<f64>,
    /// Single time for sampling commands.
    pub t: f64,
    pub m_lo: i64,
    pub m_hi: i64,
    pub k_lo: i64,
    pub k_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
    pub draws: u64,
    pub paths: u64,
    pub steps: usize,
    pub t_max: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
    pub out: Option<PathBuf>,
    pub checks: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            filtration: FiltrationConfig::factorial(),
            alpha: 1.0,
            beta: 2.0,
            tolerance: 1e-10,
            seed: None,
            t_grid: vec![0.1, 1.0, 10.0],
            t: 1.0,
            m_lo: -6,
            m_hi: 6,
            k_lo: -4,
            k_hi: 8,
            n_lo: -5,
            n_hi: 5,
            draws: 100_000,
            paths: 1_000,
            steps: 64,
            t_max: 1.0,
            x_lo: -5.0,
            x_hi: 5.0,
            points: 101,
            out: None,
            checks: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &PathBuf) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::usage(format!("cannot read config {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::usage(format!("malformed config {path:?}: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::usage("tolerance must be positive"));
        }
        if self.t_grid.is_empty() {
            return Err(Error::usage("t grid is empty"));
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::usage("t grid entries must be positive"));
        }
        if self.m_lo > self.m_hi || self.k_lo > self.k_hi || self.n_lo > self.n_hi {
            return Err(Error::usage("empty index grid"));
        }
        if self.points < 2 || !(self.x_hi > self.x_lo) {
            return Err(Error::usage("x grid needs at least two points"));
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::usage("sampling commands require --seed"))
    }
}

pub fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}
