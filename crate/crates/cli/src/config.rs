//! Optional TOML config file. Precedence is flags > config file >
//! built-in defaults, applied field by field.

use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub c: Option<f64>,
    pub ck: Option<f64>,
    pub delta: Option<f64>,
    pub tol: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<usize>,
    pub max_restarts: Option<usize>,
    pub jobs: Option<usize>,
    pub trials: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

/// Solver knobs after merging flags, config file, and defaults.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub c: f64,
    pub ck: f64,
    pub delta: Option<f64>,
    pub tol: f64,
    pub gamma: Option<f64>,
    pub steps: Option<usize>,
    pub max_restarts: usize,
    pub jobs: usize,
    pub trials: usize,
}

pub const DEFAULT_C: f64 = 4.0;
pub const DEFAULT_CK: f64 = 4.0;

#[derive(Debug, Clone, Default)]
pub struct ConfigFlags {
    pub c: Option<f64>,
    pub ck: Option<f64>,
    pub delta: Option<f64>,
    pub tol: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<usize>,
    pub max_restarts: Option<usize>,
    pub jobs: Option<usize>,
    pub trials: Option<usize>,
}

pub fn resolve(flags: &ConfigFlags, file: &FileConfig) -> ResolvedConfig {
    ResolvedConfig {
        c: flags.c.or(file.c).unwrap_or(DEFAULT_C),
        ck: flags.ck.or(file.ck).unwrap_or(DEFAULT_CK),
        delta: flags.delta.or(file.delta),
        tol: flags.tol.or(file.tol).unwrap_or(disclab::DEFAULT_TOL),
        gamma: flags.gamma.or(file.gamma),
        steps: flags.steps.or(file.steps),
        max_restarts: flags.max_restarts.or(file.max_restarts).unwrap_or(20),
        jobs: flags.jobs.or(file.jobs).unwrap_or(1),
        trials: flags.trials.or(file.trials).unwrap_or(200),
    }
}

impl ResolvedConfig {
    pub fn phase_config(&self, seed: u64) -> disclab::phased::PhaseConfig {
        disclab::phased::PhaseConfig {
            c: self.c,
            delta: self.delta,
            tol: self.tol,
            seed,
            max_restarts_per_iteration: self.max_restarts,
            gamma: self.gamma,
            steps: self.steps,
        }
    }
}
