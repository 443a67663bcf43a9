//! Fixed-step classical Runge–Kutta integration of the meal model.
//!
//! Branch switches in the right-hand side are evaluated inside every stage;
//! there is no event localization. Identical inputs give bit-identical output.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Model, ModelState, Observables, STATE_DIM};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("state became non-finite at t = {t} min")]
    NonFinite { t: f64 },
    #[error("sample time {t} min outside [{t0}, {t_end}]")]
    OutOfHorizon { t: f64, t0: f64, t_end: f64 },
}

/// Uniform grid over `[t0, t_end]` with step `dt` (min). When the span is not a
/// whole number of steps the final step is shortened to land on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<S> {
    pub t0: S,
    pub t_end: S,
    pub dt: S,
}

impl<S: Scalar> Default for TimeGrid<S> {
    fn default() -> Self {
        Self {
            t0: S::zero(),
            t_end: S::lit(120.0),
            dt: S::lit(0.05),
        }
    }
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(t0: S, t_end: S, dt: S) -> Result<Self, IntegrationError> {
        let grid = Self { t0, t_end, dt };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.dt.is_finite()) {
            return Err(IntegrationError::InvalidGrid("non-finite bound or step".into()));
        }
        if self.t0 >= self.t_end {
            return Err(IntegrationError::InvalidGrid(format!(
                "t0 = {} must be below t_end = {}",
                self.t0, self.t_end
            )));
        }
        if self.dt <= S::zero() {
            return Err(IntegrationError::InvalidGrid(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }

    /// Number of steps; a trailing remainder below 1e-9 of a step is absorbed.
    pub fn steps(&self) -> usize {
        let ratio = ((self.t_end - self.t0) / self.dt).as_f64();
        let whole = ratio.round();
        if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
            whole as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of node `k`, computed from the origin to avoid accumulated drift.
    #[inline]
    pub fn node(&self, k: usize) -> S {
        if k >= self.steps() {
            self.t_end
        } else {
            self.t0 + S::lit(k as f64) * self.dt
        }
    }
}

/// One classical RK4 step for an autonomous-in-form system `y' = f(t, y)`.
#[inline]
pub fn rk4_step<S, F, const N: usize>(f: &F, t: S, y: &[S; N], h: S) -> [S; N]
where
    S: Scalar,
    F: Fn(S, &[S; N]) -> [S; N],
{
    let two = S::lit(2.0);
    let half = h / two;
    let axpy = |a: &[S; N], k: &[S; N], s: S| {
        let mut out = *a;
        for i in 0..N {
            out[i] = a[i] + s * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + half, &axpy(y, &k1, half));
    let k3 = f(t + half, &axpy(y, &k2, half));
    let k4 = f(t + h, &axpy(y, &k3, h));
    let sixth = h / S::lit(6.0);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    out
}

/// Walks the grid from `initial`, calling `visit(k, t, state)` at every node
/// (including node 0). Stops with an error on the first non-finite state.
pub fn integrate_with<S, V>(
    model: &Model<S>,
    grid: &TimeGrid<S>,
    initial: ModelState<S>,
    mut visit: V,
) -> Result<(), IntegrationError>
where
    S: Scalar,
    V: FnMut(usize, S, &ModelState<S>),
{
    grid.validate()?;
    if !initial.is_finite() {
        return Err(IntegrationError::NonFinite { t: grid.t0.as_f64() });
    }
    let f = |t: S, y: &[S; STATE_DIM]| model.rhs(t, &ModelState::from_array(*y)).to_array();
    let steps = grid.steps();
    let mut y = initial.to_array();
    visit(0, grid.t0, &initial);
    for k in 0..steps {
        let t = grid.node(k);
        let h = grid.node(k + 1) - t;
        y = rk4_step(&f, t, &y, h);
        let t_next = grid.node(k + 1);
        let state = ModelState::from_array(y);
        if !state.is_finite() {
            return Err(IntegrationError::NonFinite { t: t_next.as_f64() });
        }
        visit(k + 1, t_next, &state);
    }
    Ok(())
}

/// Time-gridded states with observables at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub grid: TimeGrid<S>,
    pub times: Vec<S>,
    pub states: Vec<ModelState<S>>,
    pub observables: Vec<Observables<S>>,
}

/// Integrates from the model's own initial condition.
pub fn integrate<S: Scalar>(model: &Model<S>, grid: &TimeGrid<S>) -> Result<Trajectory<S>, IntegrationError> {
    integrate_from(model, grid, model.initial_state())
}

/// Integrates from an arbitrary state at `grid.t0`.
pub fn integrate_from<S: Scalar>(
    model: &Model<S>,
    grid: &TimeGrid<S>,
    initial: ModelState<S>,
) -> Result<Trajectory<S>, IntegrationError> {
    grid.validate()?;
    let n = grid.len();
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut observables = Vec::with_capacity(n);
    integrate_with(model, grid, initial, |_, t, st| {
        times.push(t);
        states.push(*st);
        observables.push(model.observables(t, st));
    })?;
    Ok(Trajectory {
        grid: *grid,
        times,
        states,
        observables,
    })
}

/// Linear interpolation of `values` over the uniform `grid` at `t`.
pub(crate) fn interpolate_on_grid<S: Scalar>(grid: &TimeGrid<S>, values: &[S], t: S) -> Result<S, IntegrationError> {
    if !(t >= grid.t0 && t <= grid.t_end) {
        return Err(IntegrationError::OutOfHorizon {
            t: t.as_f64(),
            t0: grid.t0.as_f64(),
            t_end: grid.t_end.as_f64(),
        });
    }
    let steps = grid.steps();
    let mut k = ((t - grid.t0) / grid.dt).floor().as_f64() as usize;
    k = k.min(steps);
    // the shortened last step, or rounding just past a node
    while k > 0 && grid.node(k) > t {
        k -= 1;
    }
    while k < steps && grid.node(k + 1) <= t {
        k += 1;
    }
    let tk = grid.node(k);
    if t == tk || k == steps {
        return Ok(values[k]);
    }
    let t1 = grid.node(k + 1);
    let w = (t - tk) / (t1 - tk);
    Ok(values[k] + w * (values[k + 1] - values[k]))
}

impl<S: Scalar> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn glucose(&self) -> Vec<S> {
        self.observables.iter().map(|o| o.g).collect()
    }

    /// Plasma glucose (mg/dL) at each requested time by linear interpolation
    /// between grid nodes; exact at nodes.
    pub fn sample(&self, times: &[S]) -> Result<Vec<S>, IntegrationError> {
        let g = self.glucose();
        times.iter().map(|&t| interpolate_on_grid(&self.grid, &g, t)).collect()
    }

    /// Writes `t_min,G,I,EGP,Ra,S,U,E,Qsto,Qgut,X,Ipo`, one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t_min,G,I,EGP,Ra,S,U,E,Qsto,Qgut,X,Ipo")?;
        for ((t, st), o) in self.times.iter().zip(&self.states).zip(&self.observables) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t, o.g, o.i, o.egp, o.ra, o.s, o.u, o.e, o.qsto, st.qgut, st.x, st.ipo
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DoseProfile, FixedParameters, ModelOptions, ParameterBounds};

    fn model(dose: f64, exact: bool) -> Model<f64> {
        Model::new(
            FixedParameters::default(),
            ParameterBounds::default().initial_point(),
            90.0,
            DoseProfile::instantaneous(dose),
            ModelOptions {
                basal_consistency: exact,
                clamp_egp: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn grid_counts() {
        assert_eq!(TimeGrid::<f64>::default().len(), 2401);
        assert_eq!(TimeGrid::new(0.0, 120.0, 0.025).unwrap().len(), 4801);
        let odd = TimeGrid::new(0.0, 1.0, 0.3).unwrap();
        assert_eq!(odd.len(), 5);
        assert_eq!(odd.node(4), 1.0);
        assert!(TimeGrid::new(5.0, 1.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rk4_is_exact_for_cubics() {
        // y' = 3t^2 integrates exactly under RK4
        let f = |t: f64, _y: &[f64; 1]| [3.0 * t * t];
        let mut y = [0.0];
        let mut t = 0.0;
        for _ in 0..10 {
            y = rk4_step(&f, t, &y, 0.1);
            t += 0.1;
        }
        assert!((y[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_basal_stays_flat() {
        let traj = integrate(&model(0.0, true), &TimeGrid::default()).unwrap();
        assert_eq!(traj.len(), 2401);
        for o in &traj.observables {
            assert!((o.g - 90.0).abs() < 1e-6);
        }
    }

    #[test]
    fn first_node_is_initial_state() {
        let m = model(50000.0, false);
        let traj = integrate(&m, &TimeGrid::default()).unwrap();
        assert_eq!(traj.states[0], m.initial_state());
        assert_eq!(traj.states.len(), traj.observables.len());
    }

    #[test]
    fn sampling_rules() {
        let m = model(50000.0, false);
        let traj = integrate(&m, &TimeGrid::default()).unwrap();
        let g = traj.glucose();
        assert_eq!(traj.sample(&[traj.times[300]]).unwrap()[0], g[300]);
        let mid = traj.sample(&[0.5 * (traj.times[10] + traj.times[11])]).unwrap()[0];
        assert!((mid - 0.5 * (g[10] + g[11])).abs() < 1e-12);
        let ogtt: Vec<f64> = (0..=8).map(|k| 15.0 * k as f64).collect();
        assert_eq!(traj.sample(&ogtt).unwrap().len(), 9);
        assert!(matches!(
            traj.sample(&[121.0]),
            Err(IntegrationError::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn interpolation_midpoint() {
        let grid = TimeGrid::new(0.0, 2.0, 1.0).unwrap();
        let v = [100.0, 102.0, 90.0];
        assert_eq!(interpolate_on_grid(&grid, &v, 0.5).unwrap(), 101.0);
        assert_eq!(interpolate_on_grid(&grid, &v, 1.0).unwrap(), 102.0);
        assert_eq!(interpolate_on_grid(&grid, &v, 2.0).unwrap(), 90.0);
    }

    #[test]
    fn deterministic() {
        let m = model(50000.0, false);
        let a = integrate(&m, &TimeGrid::default()).unwrap();
        let b = integrate(&m, &TimeGrid::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut m = model(50000.0, false);
        m.theta.k_abs = f64::INFINITY;
        let err = integrate(&m, &TimeGrid::default()).unwrap_err();
        assert!(matches!(err, IntegrationError::NonFinite { .. }));
    }

    #[test]
    fn csv_layout() {
        let m = model(50000.0, false);
        let traj = integrate(&m, &TimeGrid::new(0.0, 1.0, 0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t_min,G,I,EGP,Ra,S,U,E,Qsto,Qgut,X,Ipo");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,90,"));
        assert_eq!(lines[3].split(',').count(), 12);
    }
}
