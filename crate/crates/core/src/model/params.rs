use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::Scalar;

/// Physiological constants held fixed during estimation.
///
/// Field names serialize exactly as the model's symbols (`VG`, `HEb`, `p2U`, ...).
/// Units: `VG` dL/kg; `VI` L/kg; `k1`, `k2`, `m1`, `m2`, `m4`, `m6`, `p2U`,
/// `alpha`, `gamma`, `ke1` 1/min; `m5` min·kg/pmol; `Fcns`, `Vm0` mg/kg/min;
/// `Vmx` mg/kg/min per pmol/L; `Km0`, `ke2` mg/kg; `K` pmol/kg per mg/dL;
/// `beta` pmol/kg/min per mg/dL; `BW` kg; `D` mg. Missing fields take the
/// default values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct FixedParameters<S> {
    #[serde(rename = "VG")]
    pub vg: S,
    pub k1: S,
    pub k2: S,
    #[serde(rename = "VI")]
    pub vi: S,
    pub m1: S,
    pub m2: S,
    pub m4: S,
    pub m5: S,
    pub m6: S,
    #[serde(rename = "HEb")]
    pub he_b: S,
    pub f: S,
    #[serde(rename = "Fcns")]
    pub fcns: S,
    #[serde(rename = "Vm0")]
    pub vm0: S,
    #[serde(rename = "Vmx")]
    pub vmx: S,
    #[serde(rename = "Km0")]
    pub km0: S,
    #[serde(rename = "p2U")]
    pub p2u: S,
    #[serde(rename = "K")]
    pub k_gain: S,
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
    pub ke1: S,
    pub ke2: S,
    #[serde(rename = "BW")]
    pub bw: S,
    #[serde(rename = "D")]
    pub dose: S,
}

impl<S: Scalar> Default for FixedParameters<S> {
    fn default() -> Self {
        let l = S::lit;
        Self {
            vg: l(1.88),
            k1: l(0.065),
            k2: l(0.079),
            vi: l(0.05),
            m1: l(0.190),
            m2: l(0.484),
            m4: l(0.194),
            m5: l(0.0304),
            m6: l(0.6471),
            he_b: l(0.6),
            f: l(0.90),
            fcns: l(1.0),
            vm0: l(2.50),
            vmx: l(0.047),
            km0: l(225.59),
            p2u: l(0.0331),
            k_gain: l(2.30),
            alpha: l(0.050),
            beta: l(0.11),
            gamma: l(0.5),
            ke1: l(1e-4),
            ke2: l(339.0),
            bw: l(78.0),
            dose: l(50000.0),
        }
    }
}

impl<S: Scalar> FixedParameters<S> {
    pub fn named(&self) -> [(&'static str, S); 24] {
        [
            ("VG", self.vg),
            ("k1", self.k1),
            ("k2", self.k2),
            ("VI", self.vi),
            ("m1", self.m1),
            ("m2", self.m2),
            ("m4", self.m4),
            ("m5", self.m5),
            ("m6", self.m6),
            ("HEb", self.he_b),
            ("f", self.f),
            ("Fcns", self.fcns),
            ("Vm0", self.vm0),
            ("Vmx", self.vmx),
            ("Km0", self.km0),
            ("p2U", self.p2u),
            ("K", self.k_gain),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("ke1", self.ke1),
            ("ke2", self.ke2),
            ("BW", self.bw),
            ("D", self.dose),
        ]
    }

    /// Checks positivity and the fraction ranges. The dose may be zero.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in self.named() {
            let ok = if name == "D" {
                value >= S::zero()
            } else {
                value > S::zero()
            };
            if !value.is_finite() || !ok {
                return Err(ModelError::invalid(name, value, "must be finite and positive"));
            }
        }
        if self.he_b >= S::one() {
            return Err(ModelError::invalid("HEb", self.he_b, "must lie in (0, 1)"));
        }
        if self.f > S::one() {
            return Err(ModelError::invalid("f", self.f, "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn cast<T: Scalar>(&self) -> FixedParameters<T> {
        let c = |x: S| T::lit(x.as_f64());
        FixedParameters {
            vg: c(self.vg),
            k1: c(self.k1),
            k2: c(self.k2),
            vi: c(self.vi),
            m1: c(self.m1),
            m2: c(self.m2),
            m4: c(self.m4),
            m5: c(self.m5),
            m6: c(self.m6),
            he_b: c(self.he_b),
            f: c(self.f),
            fcns: c(self.fcns),
            vm0: c(self.vm0),
            vmx: c(self.vmx),
            km0: c(self.km0),
            p2u: c(self.p2u),
            k_gain: c(self.k_gain),
            alpha: c(self.alpha),
            beta: c(self.beta),
            gamma: c(self.gamma),
            ke1: c(self.ke1),
            ke2: c(self.ke2),
            bw: c(self.bw),
            dose: c(self.dose),
        }
    }
}

/// Number of estimated parameters.
pub const THETA_DIM: usize = 11;

/// Component names in vector order.
pub const THETA_NAMES: [&str; THETA_DIM] = [
    "Kmin", "Kmax", "Kabs", "Kgri", "b", "d", "EGPb", "kp2", "kp3", "kp4", "ki",
];

/// The eleven absorption and endogenous-production parameters fitted per subject.
///
/// Units: `Kmin`, `Kmax`, `Kabs`, `Kgri`, `kp2`, `ki` 1/min; `b`, `d` fractions
/// of the dose; `EGPb` mg/kg/min; `kp3` mg/kg/min per pmol/L; `kp4` mg/kg/min
/// per pmol/kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatedParameters<S> {
    #[serde(rename = "Kmin")]
    pub k_min: S,
    #[serde(rename = "Kmax")]
    pub k_max: S,
    #[serde(rename = "Kabs")]
    pub k_abs: S,
    #[serde(rename = "Kgri")]
    pub k_gri: S,
    pub b: S,
    pub d: S,
    #[serde(rename = "EGPb")]
    pub egp_b: S,
    pub kp2: S,
    pub kp3: S,
    pub kp4: S,
    pub ki: S,
}

impl<S: Scalar> EstimatedParameters<S> {
    pub fn to_array(&self) -> [S; THETA_DIM] {
        [
            self.k_min, self.k_max, self.k_abs, self.k_gri, self.b, self.d, self.egp_b, self.kp2,
            self.kp3, self.kp4, self.ki,
        ]
    }

    pub fn from_array(v: [S; THETA_DIM]) -> Self {
        Self {
            k_min: v[0],
            k_max: v[1],
            k_abs: v[2],
            k_gri: v[3],
            b: v[4],
            d: v[5],
            egp_b: v[6],
            kp2: v[7],
            kp3: v[8],
            kp4: v[9],
            ki: v[10],
        }
    }

    /// Structural constraints independent of any box: finite, positive,
    /// `Kmin < Kmax` and `0 < d < b < 1`.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in THETA_NAMES.iter().zip(self.to_array()) {
            if !value.is_finite() || value <= S::zero() {
                return Err(ModelError::invalid(name, value, "must be finite and positive"));
            }
        }
        if self.k_min >= self.k_max {
            return Err(ModelError::invalid("Kmin", self.k_min, "must be below Kmax"));
        }
        if self.d >= self.b {
            return Err(ModelError::invalid("d", self.d, "must be below b"));
        }
        if self.b >= S::one() {
            return Err(ModelError::invalid("b", self.b, "must be below 1"));
        }
        Ok(())
    }

    pub fn cast<T: Scalar>(&self) -> EstimatedParameters<T> {
        EstimatedParameters::from_array(self.to_array().map(|x| T::lit(x.as_f64())))
    }
}

/// Box constraints and starting point for estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterBounds<S> {
    pub lower: EstimatedParameters<S>,
    pub upper: EstimatedParameters<S>,
    pub initial: EstimatedParameters<S>,
}

impl<S: Scalar> Default for ParameterBounds<S> {
    fn default() -> Self {
        let v = |a: [f64; THETA_DIM]| EstimatedParameters::from_array(a.map(S::lit));
        Self {
            lower: v([1e-4, 0.035, 0.01, 1e-5, 0.65, 1e-7, 1.5, 1e-3, 1e-5, 1e-4, 1e-5]),
            upper: v([0.025, 0.1, 0.3, 0.1, 0.995, 0.01, 2.5, 0.01, 0.02, 0.1, 1e-3]),
            // ki is listed at 0.0079, above its own upper bound; initial_point() clamps it.
            initial: v([0.015, 0.0558, 0.057, 0.049, 0.85, 0.00018, 2.0, 0.0021, 0.009, 0.0618, 0.0079]),
        }
    }
}

impl<S: Scalar> ParameterBounds<S> {
    pub fn validate(&self) -> Result<(), ModelError> {
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        let init = self.initial.to_array();
        for i in 0..THETA_DIM {
            if !(lo[i].is_finite() && hi[i].is_finite() && init[i].is_finite()) {
                return Err(ModelError::invalid(THETA_NAMES[i], lo[i], "bounds must be finite"));
            }
            if lo[i] >= hi[i] {
                return Err(ModelError::invalid(THETA_NAMES[i], lo[i], "lower bound must be below upper bound"));
            }
        }
        Ok(())
    }

    /// Starting point with every component clamped into its box.
    pub fn initial_point(&self) -> EstimatedParameters<S> {
        self.clamp(&self.initial)
    }

    pub fn clamp(&self, theta: &EstimatedParameters<S>) -> EstimatedParameters<S> {
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        let mut v = theta.to_array();
        for i in 0..THETA_DIM {
            v[i] = v[i].max(lo[i]).min(hi[i]);
        }
        EstimatedParameters::from_array(v)
    }

    pub fn contains(&self, theta: &EstimatedParameters<S>) -> bool {
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        theta
            .to_array()
            .iter()
            .enumerate()
            .all(|(i, &x)| x >= lo[i] && x <= hi[i])
    }
}

fn default_gb<S: Scalar>() -> S {
    S::lit(90.0)
}

/// A complete, serializable parameterization of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct ParameterSet<S> {
    #[serde(default)]
    pub fixed: FixedParameters<S>,
    #[serde(default = "ParameterSet::<S>::default_theta")]
    pub theta: EstimatedParameters<S>,
    /// Fasting plasma glucose, mg/dL.
    #[serde(rename = "Gb", default = "default_gb")]
    pub gb: S,
}

impl<S: Scalar> ParameterSet<S> {
    fn default_theta() -> EstimatedParameters<S> {
        ParameterBounds::default().initial_point()
    }
}

impl<S: Scalar> Default for ParameterSet<S> {
    fn default() -> Self {
        Self {
            fixed: FixedParameters::default(),
            theta: Self::default_theta(),
            gb: default_gb(),
        }
    }
}
