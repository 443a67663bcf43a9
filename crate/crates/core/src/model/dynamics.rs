use serde::{Deserialize, Serialize};

use super::{BasalState, DoseProfile, EstimatedParameters, FixedParameters, ModelError, ModelState, Observables};
use crate::Scalar;

/// Behavioural switches of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    /// Recompute `Vm0` per subject so the fasting state is an exact fixed point.
    pub basal_consistency: bool,
    /// Floor endogenous production at zero inside the dynamics. Off during
    /// estimation, where the loss penalty handles negative production instead.
    pub clamp_egp: bool,
}

/// Gastric emptying rate (1/min) as a function of stomach content `qsto` (mg).
///
/// Equals the midpoint of `Kmin` and `Kmax` at `qsto = b·D` and `qsto = d·D`,
/// sits near `Kmax` for a full or empty stomach and near `Kmin` in between.
#[inline]
pub fn gastric_emptying_rate<S: Scalar>(qsto: S, theta: &EstimatedParameters<S>, dose: S) -> S {
    if dose <= S::zero() {
        return theta.k_max;
    }
    let one = S::one();
    let two = one + one;
    let five = S::lit(5.0);
    let decay = five / (two * dose * (one - theta.b));
    let recovery = five / (two * theta.d * dose);
    theta.k_min
        + (theta.k_max - theta.k_min) / two
            * ((decay * (qsto - theta.b * dose)).tanh() - (recovery * (qsto - theta.d * dose)).tanh() + two)
}

/// Renal glucose excretion (mg/kg/min); zero at or below the threshold `ke2`.
#[inline]
pub fn renal_excretion<S: Scalar>(gp: S, fixed: &FixedParameters<S>) -> S {
    if gp > fixed.ke2 {
        fixed.ke1 * (gp - fixed.ke2)
    } else {
        S::zero()
    }
}

/// Fully specified model for one subject and one meal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model<S> {
    pub fixed: FixedParameters<S>,
    pub theta: EstimatedParameters<S>,
    pub basal: BasalState<S>,
    pub dose: DoseProfile<S>,
    pub options: ModelOptions,
}

impl<S: Scalar> Model<S> {
    pub fn new(
        fixed: FixedParameters<S>,
        theta: EstimatedParameters<S>,
        gb: S,
        dose: DoseProfile<S>,
        options: ModelOptions,
    ) -> Result<Self, ModelError> {
        dose.validate()?;
        let basal = BasalState::derive(&fixed, &theta, gb, options.basal_consistency)?;
        Ok(Self {
            fixed,
            theta,
            basal,
            dose,
            options,
        })
    }

    /// State at t = 0: basal masses, empty gut, dose in the stomach when
    /// ingestion is instantaneous.
    pub fn initial_state(&self) -> ModelState<S> {
        let b = &self.basal;
        ModelState {
            gp: b.gpb,
            gt: b.gtb,
            il: b.ilb,
            ip: b.ipb,
            i1: b.ib,
            id: b.ib,
            qsto1: self.dose.initial_stomach(),
            qsto2: S::zero(),
            qgut: S::zero(),
            x: S::zero(),
            ipo: b.ipob,
            y: S::zero(),
        }
    }

    /// Endogenous glucose production (mg/kg/min) before any clamping.
    #[inline]
    pub fn egp_raw(&self, st: &ModelState<S>) -> S {
        self.basal.kp1 - self.theta.kp2 * st.gp - self.theta.kp3 * st.id - self.theta.kp4 * st.ipo
    }

    /// Plasma glucose concentration, mg/dL.
    #[inline]
    pub fn glucose(&self, st: &ModelState<S>) -> S {
        st.gp / self.fixed.vg
    }

    /// Time derivative of the state. Non-finite output signals a blown-up
    /// parameterization; the integrator reports it.
    #[inline]
    pub fn rhs(&self, t: S, state: &ModelState<S>) -> ModelState<S> {
        self.evaluate(t, state).0
    }

    /// Algebraic outputs at `(t, state)`.
    pub fn observables(&self, t: S, state: &ModelState<S>) -> Observables<S> {
        self.evaluate(t, state).1
    }

    fn evaluate(&self, t: S, st: &ModelState<S>) -> (ModelState<S>, Observables<S>) {
        let f = &self.fixed;
        let th = &self.theta;
        let b = &self.basal;
        let zero = S::zero();
        let one = S::one();

        let g = st.gp / f.vg;
        let i = st.ip / f.vi;

        // gastrointestinal tract
        let qsto = st.qsto();
        let kempt = gastric_emptying_rate(qsto, th, self.dose.amount);
        let d_qsto1 = -th.k_gri * st.qsto1 + self.dose.rate(t);
        let d_qsto2 = -kempt * st.qsto2 + th.k_gri * st.qsto1;
        let d_qgut = -th.k_abs * st.qgut + kempt * st.qsto2;
        let ra = f.f * th.k_abs * st.qgut / f.bw;

        // liver
        let egp_raw = self.egp_raw(st);
        let egp = if self.options.clamp_egp { egp_raw.max(zero) } else { egp_raw };

        // utilization and kidneys
        let vm = b.vm0 + f.vmx * st.x;
        let uid = vm * st.gt / (f.km0 + st.gt);
        let e = renal_excretion(st.gp, f);

        let d_gp = egp + ra - f.fcns - e - f.k1 * st.gp + f.k2 * st.gt;
        let d_gt = -uid + f.k1 * st.gp - f.k2 * st.gt;
        let dgdt = d_gp / f.vg;

        // beta cells
        let spo = if dgdt > zero {
            st.y + f.k_gain * dgdt + b.sb
        } else {
            st.y + b.sb
        };
        let drive = f.beta * (g - b.h);
        let d_y = if drive >= -b.sb {
            -f.alpha * (st.y - drive)
        } else {
            -f.alpha * st.y - f.alpha * b.sb
        };
        let s = f.gamma * st.ipo;
        let d_ipo = -f.gamma * st.ipo + spo;

        // insulin kinetics; extraction clamped away from 0 and 1
        let eps = S::lit(1e-6);
        let he = (-f.m5 * s + f.m6).max(eps).min(one - eps);
        let m3 = f.m1 * he / (one - he);
        let d_il = -(f.m1 + m3) * st.il + f.m2 * st.ip + s;
        let d_ip = -(f.m2 + f.m4) * st.ip + f.m1 * st.il;

        let d_i1 = -th.ki * (st.i1 - i);
        let d_id = -th.ki * (st.id - st.i1);
        let d_x = -f.p2u * st.x + f.p2u * (i - b.ib);

        let deriv = ModelState {
            gp: d_gp,
            gt: d_gt,
            il: d_il,
            ip: d_ip,
            i1: d_i1,
            id: d_id,
            qsto1: d_qsto1,
            qsto2: d_qsto2,
            qgut: d_qgut,
            x: d_x,
            ipo: d_ipo,
            y: d_y,
        };
        let obs = Observables {
            g,
            i,
            egp,
            ra,
            u: f.fcns + uid,
            uid,
            e,
            s,
            spo,
            he,
            m3,
            kempt,
            qsto,
            dgdt,
        };
        (deriv, obs)
    }
}
