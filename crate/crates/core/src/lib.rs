//! Glucose–insulin meal model simulation and oral glucose test analysis.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: parameters, basal steady state, the twelve-state right-hand
//!   side and its algebraic observables.
//! - [`integrator`]: fixed-step classical Runge–Kutta over a uniform grid.
//! - [`dataset`]: per-subject glucose sample files and corpus loading.
//! - [`estimation`]: penalized least-squares loss and box-constrained fitting.
//! - [`analysis`]: glycemic-peak detection, group classification, outlier
//!   handling, group statistics and ANOVA with Bonferroni post-hoc tests.
//!
//! Model and integrator types are generic over [`Scalar`]; the aliases below
//! fix them to `f64`, which is what estimation and analysis operate on.

pub mod analysis;
pub mod dataset;
pub mod estimation;
pub mod integrator;
pub mod model;
mod scalar;

pub use scalar::Scalar;

pub type FixedParameters = model::FixedParameters<f64>;
pub type EstimatedParameters = model::EstimatedParameters<f64>;
pub type ParameterBounds = model::ParameterBounds<f64>;
pub type BasalState = model::BasalState<f64>;
pub type ModelState = model::ModelState<f64>;
pub type Observables = model::Observables<f64>;
pub type DoseProfile = model::DoseProfile<f64>;
pub type Model = model::Model<f64>;
pub type ParameterSet = model::ParameterSet<f64>;
pub type TimeGrid = integrator::TimeGrid<f64>;
pub type Trajectory = integrator::Trajectory<f64>;

/// Single-precision variants, useful for fast what-if simulation.
pub mod f32 {
    pub type FixedParameters = crate::model::FixedParameters<f32>;
    pub type EstimatedParameters = crate::model::EstimatedParameters<f32>;
    pub type BasalState = crate::model::BasalState<f32>;
    pub type ModelState = crate::model::ModelState<f32>;
    pub type DoseProfile = crate::model::DoseProfile<f32>;
    pub type Model = crate::model::Model<f32>;
    pub type TimeGrid = crate::integrator::TimeGrid<f32>;
    pub type Trajectory = crate::integrator::Trajectory<f32>;
}

/// JSON schemas, with units, of the files the toolkit reads and writes.
pub mod schemas {
    pub const PARAMETERS: &str = include_str!("../schemas/parameters.schema.json");
    pub const FIT_CONFIG: &str = include_str!("../schemas/fit_config.schema.json");
    pub const ESTIMATION_RESULTS: &str = include_str!("../schemas/estimation_results.schema.json");
    pub const GROUPS: &str = include_str!("../schemas/groups.schema.json");
    pub const STATS: &str = include_str!("../schemas/stats.schema.json");
}
