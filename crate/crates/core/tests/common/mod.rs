#![allow(dead_code)]

use glycosim_core::dataset::SubjectRecord;
use glycosim_core::estimation::{synthetic_subject, FitConfig};
use glycosim_core::integrator::{integrate, TimeGrid};
use glycosim_core::model::{DoseProfile, EstimatedParameters, FixedParameters, Model, ModelOptions, ParameterBounds};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the full estimation box.
pub fn box_theta(rng: &mut ChaCha8Rng) -> EstimatedParameters<f64> {
    let bounds = ParameterBounds::<f64>::default();
    let (lo, hi) = (bounds.lower.to_array(), bounds.upper.to_array());
    let mut a = [0.0; 11];
    for (i, v) in a.iter_mut().enumerate() {
        *v = rng.gen_range(lo[i]..=hi[i]);
    }
    EstimatedParameters::from_array(a)
}

/// Draw from a physiologically plausible sub-box: stomach emptying fast
/// enough to finish within a few hours and insulin action that keeps
/// endogenous production positive.
pub fn plausible_theta(rng: &mut ChaCha8Rng) -> EstimatedParameters<f64> {
    EstimatedParameters::from_array([
        rng.gen_range(0.008..0.02),
        rng.gen_range(0.05..0.09),
        rng.gen_range(0.08..0.29),
        rng.gen_range(0.04..0.095),
        rng.gen_range(0.68..0.85),
        rng.gen_range(0.001..0.008),
        rng.gen_range(1.7..2.3),
        rng.gen_range(0.002..0.006),
        rng.gen_range(0.005..0.015),
        rng.gen_range(0.01..0.04),
        rng.gen_range(3e-4..9e-4),
    ])
}

pub fn min_egp(theta: &EstimatedParameters<f64>, gb: f64) -> f64 {
    let fixed = FixedParameters::<f64>::default();
    let model = Model::new(fixed, *theta, gb, DoseProfile::instantaneous(fixed.dose), ModelOptions::default()).unwrap();
    let traj = integrate(&model, &TimeGrid::default()).unwrap();
    traj.observables.iter().map(|o| o.egp).fold(f64::INFINITY, f64::min)
}

pub fn sample_times() -> Vec<f64> {
    (0..=8).map(|k| 15.0 * k as f64).collect()
}

pub struct Synthetic {
    pub theta: EstimatedParameters<f64>,
    pub subject: SubjectRecord,
}

/// `n` noise-free subjects on the 15-minute grid; draws whose own
/// endogenous production dips below zero are redrawn.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<Synthetic> {
    let mut rng = rng(seed);
    let fixed = FixedParameters::<f64>::default();
    let config = FitConfig::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let theta = plausible_theta(&mut rng);
        let gb = rng.gen_range(80.0..100.0);
        if min_egp(&theta, gb) < 0.0 {
            continue;
        }
        let id = format!("subject{:02}", out.len() + 1);
        let subject = synthetic_subject(&id, &fixed, &theta, gb, &sample_times(), &config).unwrap();
        out.push(Synthetic { theta, subject });
    }
    out
}
