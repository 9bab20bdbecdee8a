//! Projected limited-memory BFGS with an Armijo backtracking line search.
//!
//! Components at a bound whose gradient points outward are frozen for the
//! current step; the two-loop recursion acts on the remaining ones.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{
    stationarity_measure, BoxConstraint, Objective, OptimError, OptimizationReport, Status,
};
use crate::reactor::SolveError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbfgsOptions {
    pub memory: usize,
    /// Stop when stationarity(x) / stationarity(x0) falls below this.
    pub tol_rel: f64,
    /// Also stop when stationarity(x) falls below this.
    pub tol_abs: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 5,
            tol_rel: 1e-6,
            tol_abs: 0.0,
            max_iter: 200,
            armijo: 1e-4,
            max_halvings: 30,
        }
    }
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn active_mask(x: &[f64], g: &[f64], b: &BoxConstraint) -> Vec<bool> {
    (0..x.len())
        .map(|i| (x[i] <= b.lower()[i] && g[i] > 0.0) || (x[i] >= b.upper()[i] && g[i] < 0.0))
        .collect()
}

fn masked(v: &[f64], active: &[bool]) -> Vec<f64> {
    v.iter()
        .zip(active)
        .map(|(a, m)| if *m { 0.0 } else { *a })
        .collect()
}

fn two_loop<O: Objective + ?Sized>(
    obj: &O,
    g: &[f64],
    history: &VecDeque<Pair>,
    active: &[bool],
) -> Vec<f64> {
    let mut q = masked(g, active);
    let mut alpha = Vec::with_capacity(history.len());
    for p in history.iter().rev() {
        let s = masked(&p.s, active);
        let y = masked(&p.y, active);
        let a = p.rho * obj.inner(&s, &q);
        for (qi, yi) in q.iter_mut().zip(&y) {
            *qi -= a * yi;
        }
        alpha.push(a);
    }
    if let Some(p) = history.back() {
        let gamma = obj.inner(&p.s, &p.y) / obj.inner(&p.y, &p.y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (p, a) in history.iter().zip(alpha.iter().rev()) {
        let s = masked(&p.s, active);
        let y = masked(&p.y, active);
        let b = p.rho * obj.inner(&y, &q);
        for (qi, si) in q.iter_mut().zip(&s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Minimizes `obj` over `bounds` starting from the projection of `x0`.
pub fn projected_lbfgs<O: Objective + ?Sized>(
    obj: &mut O,
    x0: &[f64],
    bounds: &BoxConstraint,
    opts: &LbfgsOptions,
) -> Result<OptimizationReport, OptimError> {
    if x0.len() != obj.dim() || bounds.dim() != obj.dim() {
        return Err(OptimError::Dimension {
            expected: obj.dim(),
            got: x0.len(),
        });
    }
    let mut x = bounds.project(x0);
    let (mut f, mut g) = obj.evaluate(&x)?;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(OptimError::NonFiniteStart);
    }
    let stat0 = stationarity_measure(obj, &x, &g, bounds);
    let mut report = OptimizationReport {
        status: Status::MaxIterations,
        iterations: 0,
        cost_history: vec![f],
        stationarity_history: vec![stat0],
        state_solves: 0,
        adjoint_solves: 0,
        final_controls: Vec::new(),
        final_cost: f,
        constraint_violation: None,
        stages: Vec::new(),
    };
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(opts.memory);
    let done = |stat: f64| stat <= opts.tol_abs || stat <= opts.tol_rel * stat0;

    if done(stat0) {
        report.status = Status::Converged;
    } else {
        for it in 0..opts.max_iter {
            let active = active_mask(&x, &g, bounds);
            let mut d = two_loop(obj, &g, &history, &active);
            let mut slope = obj.inner(&g, &d);
            if !(slope < 0.0) {
                history.clear();
                d = masked(&g, &active).iter().map(|v| -v).collect();
                slope = obj.inner(&g, &d);
            }
            debug_assert!(slope <= 0.0);

            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                bounds.project_in_place(&mut trial);
                let dx: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                match obj.evaluate(&trial) {
                    Ok((ft, gt)) if ft.is_finite() && gt.iter().all(|v| v.is_finite()) => {
                        if ft <= f + opts.armijo * obj.inner(&g, &dx) {
                            accepted = Some((trial, ft, gt, dx));
                            break;
                        }
                    }
                    Ok(_)
                    | Err(SolveError::NonConvergence { .. })
                    | Err(SolveError::NonFinite { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
                step *= 0.5;
            }
            let Some((x_new, f_new, g_new, s)) = accepted else {
                report.status = Status::LineSearchFailed;
                report.iterations = it;
                break;
            };
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = obj.inner(&s, &y);
            if sy <= 1e-14 * obj.norm(&s) * obj.norm(&y) {
                history.clear();
            } else {
                if history.len() == opts.memory {
                    history.pop_front();
                }
                history.push_back(Pair {
                    s,
                    y,
                    rho: 1.0 / sy,
                });
            }
            x = x_new;
            f = f_new;
            g = g_new;
            let stat = stationarity_measure(obj, &x, &g, bounds);
            report.cost_history.push(f);
            report.stationarity_history.push(stat);
            report.iterations = it + 1;
            if done(stat) {
                report.status = Status::Converged;
                break;
            }
        }
    }
    let counts = obj.counts();
    report.state_solves = counts.state_solves;
    report.adjoint_solves = counts.adjoint_solves;
    report.final_cost = f;
    report.final_controls = x;
    Ok(report)
}
