use crate::dataset::SubjectRecord;
use crate::estimation::{EstimationError, FitConfig};
use crate::integrator::{integrate, integrate_with, interpolate_on_grid, IntegrationError, TimeGrid, Trajectory};
use crate::model::{DoseProfile, EstimatedParameters, FixedParameters, Model};

/// Components of one loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    /// Penalized loss; `+inf` when the simulation failed.
    pub total: f64,
    pub mse: f64,
    pub min_egp: f64,
}

impl LossValue {
    const FAILED: LossValue = LossValue {
        total: f64::INFINITY,
        mse: f64::INFINITY,
        min_egp: f64::NAN,
    };
}

/// Loss for one subject with the per-subject pieces precomputed.
#[derive(Debug, Clone)]
pub struct LossEvaluator<'a> {
    subject: &'a SubjectRecord,
    fixed: FixedParameters<f64>,
    config: &'a FitConfig,
    grid: TimeGrid<f64>,
    times: Vec<f64>,
    observed: Vec<f64>,
}

impl<'a> LossEvaluator<'a> {
    pub fn new(
        subject: &'a SubjectRecord,
        fixed: &FixedParameters<f64>,
        config: &'a FitConfig,
    ) -> Result<Self, EstimationError> {
        config.validate()?;
        fixed.validate()?;
        let malformed = |reason: &str| EstimationError::MalformedSubject {
            id: subject.id.clone(),
            reason: reason.to_string(),
        };
        if subject.samples.len() < 2 {
            return Err(malformed("fewer than 2 samples"));
        }
        if subject.samples[0].t != 0.0 {
            return Err(malformed("first sample is not at t = 0"));
        }
        if subject.samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(malformed("sample times are not strictly increasing"));
        }
        if subject.samples.iter().any(|s| !(s.glucose > 0.0 && s.glucose.is_finite())) {
            return Err(malformed("non-positive glucose"));
        }
        let grid = TimeGrid::new(0.0, subject.last_time(), config.dt)
            .map_err(|e| malformed(&e.to_string()))?;
        Ok(Self {
            subject,
            fixed: *fixed,
            config,
            grid,
            times: subject.times(),
            observed: subject.glucose(),
        })
    }

    pub fn subject(&self) -> &SubjectRecord {
        self.subject
    }

    pub fn grid(&self) -> &TimeGrid<f64> {
        &self.grid
    }

    pub fn dose(&self) -> DoseProfile<f64> {
        let base = DoseProfile::instantaneous(self.fixed.dose);
        DoseProfile {
            mode: self.config.dose_mode,
            ..base
        }
    }

    /// Builds the subject's model at `theta`.
    pub fn model(&self, theta: &EstimatedParameters<f64>) -> Result<Model<f64>, EstimationError> {
        Ok(Model::new(
            self.fixed,
            *theta,
            self.subject.gb(),
            self.dose(),
            self.config.model_options(),
        )?)
    }

    /// Full trajectory at `theta` over the subject's sampling horizon.
    pub fn trajectory(&self, theta: &EstimatedParameters<f64>) -> Result<Trajectory<f64>, EstimationError> {
        Ok(integrate(&self.model(theta)?, &self.grid)?)
    }

    pub fn evaluate(&self, theta: &EstimatedParameters<f64>) -> LossValue {
        let Ok(model) = self.model(theta) else {
            return LossValue::FAILED;
        };
        let mut glucose = Vec::with_capacity(self.grid.len());
        let mut min_egp = f64::INFINITY;
        let run = integrate_with(&model, &self.grid, model.initial_state(), |_, _, st| {
            glucose.push(model.glucose(st));
            min_egp = min_egp.min(model.egp_raw(st));
        });
        if run.is_err() {
            return LossValue::FAILED;
        }
        let mut sse = 0.0;
        for (&t, &g_obs) in self.times.iter().zip(&self.observed) {
            let Ok(g_sim) = interpolate_on_grid(&self.grid, &glucose, t) else {
                return LossValue::FAILED;
            };
            sse += (g_obs - g_sim) * (g_obs - g_sim);
        }
        let mse = sse / self.times.len() as f64;
        let penalty = if min_egp < 0.0 { self.config.penalty } else { 0.0 };
        let total = mse + penalty;
        if !total.is_finite() {
            return LossValue::FAILED;
        }
        LossValue { total, mse, min_egp }
    }
}

/// Penalized loss of `theta` for `subject`: mean squared glucose error at the
/// sample times plus `config.penalty` if endogenous production ever goes
/// negative. A failed simulation yields `+inf`.
pub fn loss(
    theta: &EstimatedParameters<f64>,
    subject: &SubjectRecord,
    fixed: &FixedParameters<f64>,
    config: &FitConfig,
) -> Result<f64, EstimationError> {
    Ok(LossEvaluator::new(subject, fixed, config)?.evaluate(theta).total)
}

/// Noise-free subject sampled from the model at `theta` on `times`, built
/// the same way the loss simulates (same step and dose mode).
pub fn synthetic_subject(
    id: &str,
    fixed: &FixedParameters<f64>,
    theta: &EstimatedParameters<f64>,
    gb: f64,
    times: &[f64],
    config: &FitConfig,
) -> Result<SubjectRecord, EstimationError> {
    let last = times.last().copied().unwrap_or(0.0);
    let grid = TimeGrid::new(0.0, last, config.dt)?;
    let base = DoseProfile::instantaneous(fixed.dose);
    let dose = DoseProfile {
        mode: config.dose_mode,
        ..base
    };
    let model = Model::new(*fixed, *theta, gb, dose, config.model_options())?;
    let glucose = integrate(&model, &grid)?.glucose();
    // the first sample carries Gb itself so the fit sees the same basal state
    let mut samples = times
        .iter()
        .map(|&t| {
            Ok(crate::dataset::Sample {
                t,
                glucose: interpolate_on_grid(&grid, &glucose, t)?,
            })
        })
        .collect::<Result<Vec<_>, IntegrationError>>()?;
    if let Some(first) = samples.first_mut().filter(|s| s.t == 0.0) {
        first.glucose = gb;
    }
    Ok(SubjectRecord::new(id, samples)?)
}
