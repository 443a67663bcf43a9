//! Nelder–Mead on the unit box with every trial point projected onto the box.
//!
//! Coefficients follow the dimension-adaptive variant (Gao & Han), which holds
//! up better than the textbook values beyond a handful of dimensions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Best objective fell below the target.
    LossBelowTol,
    /// Simplex collapsed: every vertex within tolerance of the best one.
    ParamStalled,
    /// Evaluation budget used up.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Edge length of the starting simplex, in unit-box coordinates.
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop once the best value drops below this.
    pub f_target: f64,
    /// Stop once every vertex lies within this of the best vertex, measured
    /// per coordinate after multiplying by `scale`.
    pub x_tol: f64,
    /// Per-coordinate scale from unit-box to user units.
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub reason: StopReason,
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Counts evaluations and refuses to exceed the budget.
struct Budgeted<'a, F> {
    f: &'a mut F,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<'_, F> {
    fn call(&mut self, x: &[f64]) -> Option<f64> {
        if self.evals >= self.max {
            return None;
        }
        self.evals += 1;
        let v = (self.f)(x);
        Some(if v.is_nan() { f64::INFINITY } else { v })
    }
}

/// Minimizes `f` over `[0, 1]^n` starting from `x0`.
pub fn minimize<F>(f: &mut F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut obj = Budgeted {
        f,
        evals: 0,
        max: opts.max_evals,
    };

    let mut start = x0.to_vec();
    project(&mut start);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let Some(f0) = obj.call(&start) else {
        return NelderMeadOutcome {
            x: start,
            f: f64::INFINITY,
            evals: 0,
            reason: StopReason::BudgetExhausted,
        };
    };
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut v = start.clone();
        v[i] = if v[i] + opts.initial_step <= 1.0 {
            v[i] + opts.initial_step
        } else {
            v[i] - opts.initial_step
        };
        match obj.call(&v) {
            Some(fv) => simplex.push((v, fv)),
            None => break,
        }
    }

    let finish = |simplex: &mut Vec<(Vec<f64>, f64)>, evals: usize, reason| {
        sort(simplex);
        let (x, f) = simplex[0].clone();
        NelderMeadOutcome { x, f, evals, reason }
    };
    if simplex.len() < n + 1 {
        return finish(&mut simplex, obj.evals, StopReason::BudgetExhausted);
    }

    loop {
        sort(&mut simplex);
        if simplex[0].1 < opts.f_target {
            return finish(&mut simplex, obj.evals, StopReason::LossBelowTol);
        }
        let best = simplex[0].0.clone();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best).zip(&opts.scale).map(|((a, b), s)| (a - b).abs() * s))
            .fold(0.0, f64::max);
        if diameter < opts.x_tol {
            return finish(&mut simplex, obj.evals, StopReason::ParamStalled);
        }

        let worst = simplex[n].clone();
        let f_second = simplex[n - 1].1;
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut p);
            p
        };

        let xr = along(alpha);
        let Some(fr) = obj.call(&xr) else {
            return finish(&mut simplex, obj.evals, StopReason::BudgetExhausted);
        };
        if fr < simplex[0].1 {
            let xe = along(alpha * beta);
            let Some(fe) = obj.call(&xe) else {
                simplex[n] = (xr, fr);
                return finish(&mut simplex, obj.evals, StopReason::BudgetExhausted);
            };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, outside) = if fr < worst.1 {
            (along(alpha * gamma), true)
        } else {
            (along(-gamma), false)
        };
        let Some(fc) = obj.call(&xc) else {
            return finish(&mut simplex, obj.evals, StopReason::BudgetExhausted);
        };
        let accept = if outside { fc <= fr } else { fc < worst.1 };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        for k in 1..=n {
            let mut v: Vec<f64> = best.iter().zip(&simplex[k].0).map(|(b, x)| b + delta * (x - b)).collect();
            project(&mut v);
            let Some(fv) = obj.call(&v) else {
                return finish(&mut simplex, obj.evals, StopReason::BudgetExhausted);
            };
            simplex[k] = (v, fv);
        }
    }
}

/// Ascending by value; ties keep insertion order so runs are reproducible.
fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}
