use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, NelderMeadOptions, StopReason};
use super::{EstimationError, EstimationResult, FailureKind, FitConfig, LossEvaluator};
use crate::analysis::{GlucoseCurve, PeakInfo, DEFAULT_TOL_G};
use crate::dataset::SubjectRecord;
use crate::model::{EstimatedParameters, FixedParameters, THETA_DIM};

/// Maps unit-box coordinates to parameters, clamping again so rounding in
/// `lo + u·(hi − lo)` can never leave the box.
struct BoxMap {
    lo: [f64; THETA_DIM],
    hi: [f64; THETA_DIM],
}

impl BoxMap {
    fn new(config: &FitConfig) -> Self {
        Self {
            lo: config.bounds.lower.to_array(),
            hi: config.bounds.upper.to_array(),
        }
    }

    fn to_theta(&self, u: &[f64]) -> EstimatedParameters<f64> {
        let mut v = [0.0; THETA_DIM];
        for i in 0..THETA_DIM {
            v[i] = (self.lo[i] + u[i] * (self.hi[i] - self.lo[i])).clamp(self.lo[i], self.hi[i]);
        }
        EstimatedParameters::from_array(v)
    }

    fn to_unit(&self, theta: &EstimatedParameters<f64>) -> Vec<f64> {
        let v = theta.to_array();
        (0..THETA_DIM)
            .map(|i| ((v[i] - self.lo[i]) / (self.hi[i] - self.lo[i])).clamp(0.0, 1.0))
            .collect()
    }

    fn scale(&self) -> Vec<f64> {
        (0..THETA_DIM).map(|i| self.hi[i] - self.lo[i]).collect()
    }
}

/// Estimates the parameters of one subject.
///
/// Starts from the configured initial point (clamped into the box), runs the
/// projected simplex search and, if it stops early without reaching the loss
/// tolerance, restarts once from the best vertex with the remaining budget.
/// Returns the best point ever evaluated.
pub fn fit(
    subject: &SubjectRecord,
    fixed: &FixedParameters<f64>,
    config: &FitConfig,
) -> Result<EstimationResult, EstimationError> {
    let evaluator = LossEvaluator::new(subject, fixed, config)?;
    let map = BoxMap::new(config);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut objective = |u: &[f64]| {
        let value = evaluator.evaluate(&map.to_theta(u)).total;
        if value.is_finite() && best.as_ref().is_none_or(|(_, f)| value < *f) {
            best = Some((u.to_vec(), value));
        }
        value
    };

    let mut opts = NelderMeadOptions {
        initial_step: config.initial_step,
        max_evals: config.max_evals,
        f_target: config.tol,
        x_tol: config.tol,
        scale: map.scale(),
    };
    let start = map.to_unit(&config.bounds.initial_point());
    let first = nelder_mead::minimize(&mut objective, &start, &opts);
    let mut evals = first.evals;
    let mut reason = first.reason;
    if config.restart && reason == StopReason::ParamStalled && evals < config.max_evals {
        opts.max_evals = config.max_evals - evals;
        let second = nelder_mead::minimize(&mut objective, &first.x, &opts);
        evals += second.evals;
        reason = second.reason;
    }

    let Some((u, _)) = best else {
        return Err(EstimationError::AllNonFinite {
            id: subject.id.clone(),
        });
    };
    let theta = map.to_theta(&u);
    let value = evaluator.evaluate(&theta);
    let peak = evaluator
        .trajectory(&theta)
        .ok()
        .map(|traj| PeakInfo::of(&GlucoseCurve::from(&traj), DEFAULT_TOL_G));
    Ok(EstimationResult {
        subject: subject.id.clone(),
        gb: subject.gb(),
        theta,
        loss: value.total,
        mse: value.mse,
        evals,
        converged: reason != StopReason::BudgetExhausted,
        stop_reason: reason,
        min_egp: value.min_egp,
        peak,
    })
}

/// Outcome for one subject of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BatchEntry {
    Ok(EstimationResult),
    Failed {
        subject: String,
        kind: FailureKind,
        error: String,
    },
}

impl BatchEntry {
    pub fn result(&self) -> Option<&EstimationResult> {
        match self {
            BatchEntry::Ok(r) => Some(r),
            BatchEntry::Failed { .. } => None,
        }
    }
}

/// Fits every subject on `parallelism` worker threads. Output order matches
/// input order and every entry equals what [`fit`] returns on its own.
pub fn batch_fit(
    subjects: &[SubjectRecord],
    fixed: &FixedParameters<f64>,
    config: &FitConfig,
    parallelism: usize,
) -> Result<Vec<BatchEntry>, EstimationError> {
    config.validate()?;
    let run = |s: &SubjectRecord| match fit(s, fixed, config) {
        Ok(r) => BatchEntry::Ok(r),
        Err(e) => BatchEntry::Failed {
            subject: s.id.clone(),
            kind: e.kind(),
            error: e.to_string(),
        },
    };
    if parallelism <= 1 {
        return Ok(subjects.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| EstimationError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| subjects.par_iter().map(run).collect()))
}
