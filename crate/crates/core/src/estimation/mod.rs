//! Per-subject estimation of the absorption and endogenous-production
//! parameters from sampled glucose curves.
//!
//! The loss is the mean squared glucose error at the sample times plus a
//! constant penalty whenever simulated endogenous production dips below zero.
//! It is minimized over the parameter box by a projected Nelder–Mead search,
//! restarted once from its best vertex.

mod fit;
mod loss;
pub mod nelder_mead;

pub use fit::{batch_fit, fit, BatchEntry};
pub use loss::{loss, synthetic_subject, LossEvaluator, LossValue};
pub use nelder_mead::StopReason;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::PeakInfo;
use crate::dataset::DatasetError;
use crate::integrator::IntegrationError;
use crate::model::{DoseMode, EstimatedParameters, ModelError, ModelOptions, ParameterBounds, THETA_DIM};

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("subject {id}: {reason}")]
    MalformedSubject { id: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("subject {id}: every loss evaluation was non-finite")]
    AllNonFinite { id: String },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Broad cause of a failed fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Bad input: configuration, parameters or subject data.
    Validation,
    /// The model could not be evaluated.
    Numerical,
}

impl EstimationError {
    pub fn kind(&self) -> FailureKind {
        match self {
            EstimationError::AllNonFinite { .. } | EstimationError::Integration(_) | EstimationError::ThreadPool(_) => {
                FailureKind::Numerical
            }
            _ => FailureKind::Validation,
        }
    }
}

/// Settings of one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Stop when the loss drops below `tol` or the simplex spans less than
    /// `tol` in every parameter.
    pub tol: f64,
    /// Loss evaluation budget, including the restart.
    pub max_evals: usize,
    /// Integration step, min.
    pub dt: f64,
    /// Penalty added when endogenous production goes negative, (mg/dL)^2.
    pub penalty: f64,
    pub bounds: ParameterBounds<f64>,
    /// Starting simplex edge as a fraction of each parameter's range.
    pub initial_step: f64,
    /// Restart the search once from the best vertex.
    pub restart: bool,
    pub dose_mode: DoseMode,
    pub basal_consistency: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_evals: 500 * THETA_DIM,
            dt: 0.05,
            penalty: 1e6,
            bounds: ParameterBounds::default(),
            initial_step: 0.1,
            restart: true,
            dose_mode: DoseMode::Instantaneous,
            basal_consistency: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), EstimationError> {
        let bad = |m: &str| Err(EstimationError::InvalidConfig(m.to_string()));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if self.max_evals < 1 {
            return bad("max_evals must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad("penalty must be positive");
        }
        if !(self.initial_step > 0.0 && self.initial_step <= 1.0) {
            return bad("initial_step must lie in (0, 1]");
        }
        self.bounds
            .validate()
            .map_err(|e| EstimationError::InvalidConfig(e.to_string()))
    }

    /// Model switches used while fitting; endogenous production is never
    /// clamped here.
    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            basal_consistency: self.basal_consistency,
            clamp_egp: false,
        }
    }
}

/// Fitted parameters and diagnostics for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub subject: String,
    /// Fasting glucose taken from the t = 0 sample, mg/dL.
    #[serde(rename = "Gb")]
    pub gb: f64,
    pub theta: EstimatedParameters<f64>,
    /// Penalized loss, (mg/dL)^2.
    pub loss: f64,
    /// Mean squared glucose error alone, (mg/dL)^2.
    pub mse: f64,
    pub evals: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Minimum simulated endogenous production over the horizon, mg/kg/min.
    pub min_egp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak: Option<PeakInfo>,
}
