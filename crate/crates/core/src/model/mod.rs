//! The six-compartment glucose–insulin meal model.
//!
//! Compartments: gastrointestinal tract, glucose kinetics, peripheral
//! utilization, liver (endogenous production), beta-cell secretion and insulin
//! kinetics. State is twelve-dimensional; see [`ModelState`].

mod basal;
mod dose;
mod dynamics;
mod params;
mod state;

pub use basal::BasalState;
pub use dose::{DoseMode, DoseProfile};
pub use dynamics::{gastric_emptying_rate, renal_excretion, Model, ModelOptions};
pub use params::{
    EstimatedParameters, FixedParameters, ParameterBounds, ParameterSet, THETA_DIM, THETA_NAMES,
};
pub use state::{ModelState, Observables, STATE_DIM};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("derived basal quantity {name} = {value} is not finite and positive")]
    InconsistentBasal { name: &'static str, value: f64 },
}

impl ModelError {
    pub(crate) fn invalid<S: crate::Scalar>(name: &str, value: S, reason: &'static str) -> Self {
        ModelError::InvalidParameter {
            name: name.to_string(),
            value: value.as_f64(),
            reason,
        }
    }
}
