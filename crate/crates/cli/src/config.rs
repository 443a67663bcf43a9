//! Run configuration. Precedence: command-line flag, then config file, then
//! built-in defaults.

use std::path::Path;

use glycosim_core::analysis::{Metric, Spread, DEFAULT_TOL_G};
use glycosim_core::estimation::FitConfig;
use glycosim_core::model::{DoseMode, ParameterSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// min
    pub horizon: f64,
    /// min
    pub dt: f64,
    pub dose_mode: DoseMode,
    pub basal_consistency: bool,
    pub clamp_egp: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            horizon: 120.0,
            dt: 0.05,
            dose_mode: DoseMode::Instantaneous,
            basal_consistency: false,
            clamp_egp: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// mg/dL
    pub tol_g: f64,
    /// 1/min; derived from the corpus when absent.
    pub kabs_threshold: Option<f64>,
    /// Horizon over which fitted curves are re-simulated for peak detection, min.
    pub horizon: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            tol_g: DEFAULT_TOL_G,
            kabs_threshold: None,
            horizon: 120.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub metric: Metric,
    pub spread: Spread,
    /// Restrict to Group 1 split by biological peak value.
    pub split: bool,
    /// mg/dL
    pub split_threshold: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Kabs,
            spread: Spread::Sd,
            split: false,
            split_threshold: glycosim_core::analysis::GBIO_SPLIT,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Model parameters for `simulate`; `fixed` is also used by `fit` and `classify`.
    pub parameters: ParameterSet<f64>,
    pub simulate: SimulateConfig,
    pub fit: FitConfig,
    pub classify: ClassifyConfig,
    pub stats: StatsConfig,
    /// Worker threads for `fit`; all available cores when absent.
    pub jobs: Option<usize>,
    /// Recorded only; every command is deterministic.
    pub seed: Option<u64>,
}

impl Config {
    /// Reads a config file. A run manifest is accepted too, in which case its
    /// config snapshot is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if value.get("command").is_some() && value.get("config").is_some() {
            value = value["config"].take();
        }
        serde_json::from_value(value).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }
}

/// Replaces `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"parameters": {"fixed": {"D": 0}}, "fit": {"max_evals": 10}, "jobs": 2}"#).unwrap();
        let c = Config::load(&path).unwrap();
        assert_eq!(c.parameters.fixed.dose, 0.0);
        assert_eq!(c.parameters.fixed.bw, 78.0);
        assert_eq!(c.fit.max_evals, 10);
        assert_eq!(c.fit.tol, 1e-10);
        assert_eq!(c.jobs, Some(2));
        assert_eq!(c.classify.tol_g, 2.6);
    }

    #[test]
    fn manifest_is_accepted_as_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"command": "fit", "config": {"fit": {"max_evals": 7}}, "outputs": []}"#).unwrap();
        assert_eq!(Config::load(&path).unwrap().fit.max_evals, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"fitt": {}}"#).unwrap();
        assert!(matches!(Config::load(&path), Err(CliError::Validation(_))));
    }
}
