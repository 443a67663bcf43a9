use serde::{Deserialize, Serialize};

use crate::integrator::Trajectory;

/// Default tolerance separating the mathematical and biological peak, mg/dL.
pub const DEFAULT_TOL_G: f64 = 2.6;

/// A glucose curve on an increasing time grid (min, mg/dL).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlucoseCurve {
    pub times: Vec<f64>,
    pub glucose: Vec<f64>,
}

impl GlucoseCurve {
    pub fn new(times: Vec<f64>, glucose: Vec<f64>) -> Self {
        assert_eq!(times.len(), glucose.len(), "times and glucose differ in length");
        Self { times, glucose }
    }

    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let glucose = times.iter().map(|&t| f(t)).collect();
        Self { times, glucose }
    }
}

impl From<&Trajectory<f64>> for GlucoseCurve {
    fn from(traj: &Trajectory<f64>) -> Self {
        Self {
            times: traj.times.clone(),
            glucose: traj.glucose(),
        }
    }
}

/// Mathematical and biological glycemic peaks of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakInfo {
    /// Earliest time of the maximum, min.
    pub t_peak: f64,
    /// Maximum glucose, mg/dL.
    pub g_peak: f64,
    /// Earliest time glucose reaches `g_bio`, min.
    pub t_bio: f64,
    /// `g_peak − tol_G`, mg/dL.
    pub g_bio: f64,
}

impl PeakInfo {
    pub fn of(curve: &GlucoseCurve, tol_g: f64) -> Self {
        let (t_peak, g_peak) = detect_peak(curve);
        let (t_bio, g_bio) = biological_peak(curve, tol_g);
        Self {
            t_peak,
            g_peak,
            t_bio,
            g_bio,
        }
    }
}

/// Maximum glucose and the earliest node attaining it.
///
/// # Panics
/// On an empty curve.
pub fn detect_peak(curve: &GlucoseCurve) -> (f64, f64) {
    assert!(!curve.times.is_empty(), "empty glucose curve");
    let mut best = 0;
    for (k, &g) in curve.glucose.iter().enumerate() {
        if g > curve.glucose[best] {
            best = k;
        }
    }
    (curve.times[best], curve.glucose[best])
}

/// Biological peak: the value `max − tol_g` and the earliest node at which
/// the curve reaches it. For a plateau this is where the plateau begins.
pub fn biological_peak(curve: &GlucoseCurve, tol_g: f64) -> (f64, f64) {
    let (t_peak, g_peak) = detect_peak(curve);
    let g_bio = g_peak - tol_g;
    let t_bio = curve
        .times
        .iter()
        .zip(&curve.glucose)
        .find(|(_, &g)| g >= g_bio)
        .map(|(&t, _)| t)
        .unwrap_or(t_peak);
    (t_bio, g_bio)
}
