use serde::{Deserialize, Serialize};

use super::dynamics::renal_excretion;
use super::{EstimatedParameters, FixedParameters, ModelError};
use crate::Scalar;

/// Fasting steady state of one subject.
///
/// `gb`, `h` mg/dL; `gpb`, `gtb` mg/kg; `ib` pmol/L; `ipb`, `ilb`, `ipob`
/// pmol/kg; `sb` pmol/kg/min; `m30` 1/min; `kp1` mg/kg/min. `vm0` is the
/// maximal insulin-independent utilization actually used by the dynamics:
/// the fixed table value, or the value that makes the basal state exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasalState<S> {
    pub gb: S,
    pub gpb: S,
    pub gtb: S,
    pub ib: S,
    pub ipb: S,
    pub ilb: S,
    pub ipob: S,
    pub sb: S,
    pub m30: S,
    pub kp1: S,
    pub h: S,
    pub vm0: S,
}

impl<S: Scalar> BasalState<S> {
    /// Derives every basal quantity from the fasting glucose `gb`.
    ///
    /// With `exact_fixed_point` set, `Vm0` is recomputed so that tissue glucose
    /// is also stationary; otherwise the fixed `Vm0` is kept and `dGt/dt` may be
    /// nonzero at t = 0.
    pub fn derive(
        fixed: &FixedParameters<S>,
        theta: &EstimatedParameters<S>,
        gb: S,
        exact_fixed_point: bool,
    ) -> Result<Self, ModelError> {
        if !gb.is_finite() || gb <= S::zero() {
            return Err(ModelError::invalid("Gb", gb, "must be finite and positive"));
        }
        fixed.validate()?;
        theta.validate()?;

        let one = S::one();
        let heb = fixed.he_b;
        let gpb = gb * fixed.vg;
        let m30 = fixed.m1 * heb / (one - heb);
        let sb = (fixed.m6 - heb) / fixed.m5;
        let ipb = sb * (one - heb) / (fixed.m2 * heb + fixed.m4);
        let ilb = (sb - fixed.m4 * ipb) / m30;
        let ib = ipb / fixed.vi;
        let ipob = sb / fixed.gamma;
        let kp1 = theta.egp_b + theta.kp2 * gpb + theta.kp3 * ib + theta.kp4 * ipob;
        // dGp/dt = 0 with no meal
        let eb = renal_excretion(gpb, fixed);
        let gtb = (fixed.fcns + eb + fixed.k1 * gpb - theta.egp_b) / fixed.k2;
        let vm0 = if exact_fixed_point {
            let uid_b = fixed.k1 * gpb - fixed.k2 * gtb;
            uid_b * (fixed.km0 + gtb) / gtb
        } else {
            fixed.vm0
        };

        let basal = Self {
            gb,
            gpb,
            gtb,
            ib,
            ipb,
            ilb,
            ipob,
            sb,
            m30,
            kp1,
            h: gb,
            vm0,
        };
        basal.check()?;
        Ok(basal)
    }

    fn check(&self) -> Result<(), ModelError> {
        let fields = [
            ("Gpb", self.gpb),
            ("Gtb", self.gtb),
            ("Ib", self.ib),
            ("Ipb", self.ipb),
            ("Ilb", self.ilb),
            ("Ipob", self.ipob),
            ("Sb", self.sb),
            ("m30", self.m30),
            ("kp1", self.kp1),
            ("Vm0", self.vm0),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= S::zero() {
                return Err(ModelError::InconsistentBasal {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }
}
