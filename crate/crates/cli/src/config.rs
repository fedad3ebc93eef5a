use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use fracground::solvers::{Method, SolverConfig};
use fracground::{GridSpec, ProblemSpec};
use serde::{Deserialize, Serialize};

/// Input of `solve`, `sweep` and the config-driven audits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Defaults to pohozaev for sp3 and nehari otherwise.
    #[serde(default)]
    pub method: Option<Method>,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    // relative profile files are taken from the config's directory
    if let (Some(file), Some(dir)) = (cfg.solver.init_file.as_mut(), path.parent()) {
        if file.is_relative() {
            *file = dir.join(&*file);
        }
    }
    cfg.solver
        .validate()
        .with_context(|| format!("invalid solver section in {}", path.display()))?;
    Ok(cfg)
}
