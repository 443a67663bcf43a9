pub mod classify;
pub mod fit;
pub mod simulate;
pub mod stats;

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// `mean ± spread`, or `-` for an empty group.
pub fn mean_spread(mean: Option<f64>, spread: Option<f64>) -> String {
    match (mean, spread) {
        (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
        _ => "-".to_string(),
    }
}
