//! Continuation in the penalty parameter γ of a Moreau–Yosida penalized
//! objective, each stage warm-started from the previous one.

use serde::Serialize;

use super::{
    projected_lbfgs, BoxConstraint, LbfgsOptions, Objective, OptimError, OptimizationReport, Status,
};

/// An objective J(x) + (γ/2)·max(0, g(x))² for a scalar constraint g(x) ≤ 0.
pub trait PenalizedObjective: Objective {
    fn set_gamma(&mut self, gamma: f64);

    /// max(0, g(x)) at the most recently evaluated point.
    fn constraint_violation(&self) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyOptions {
    pub gammas: Vec<f64>,
    pub inner: LbfgsOptions,
}

impl HomotopyOptions {
    /// γ_l = base^l for l = 0..=levels.
    pub fn geometric(base: f64, levels: u32, inner: LbfgsOptions) -> Self {
        HomotopyOptions {
            gammas: (0..=levels).map(|l| base.powi(l as i32)).collect(),
            inner,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageSummary {
    pub gamma: f64,
    pub status: Status,
    pub iterations: usize,
    pub cost: f64,
    pub stationarity: f64,
    pub violation: f64,
}

pub fn moreau_yosida_homotopy<P: PenalizedObjective + ?Sized>(
    problem: &mut P,
    x0: &[f64],
    bounds: &BoxConstraint,
    opts: &HomotopyOptions,
) -> Result<OptimizationReport, OptimError> {
    let mut x = bounds.project(x0);
    let mut total: Option<OptimizationReport> = None;
    for &gamma in &opts.gammas {
        problem.set_gamma(gamma);
        let stage = projected_lbfgs(problem, &x, bounds, &opts.inner)?;
        // re-evaluate so the violation belongs to the final iterate
        problem.evaluate(&stage.final_controls)?;
        let violation = problem.constraint_violation();
        let summary = StageSummary {
            gamma,
            status: stage.status,
            iterations: stage.iterations,
            cost: stage.final_cost,
            stationarity: *stage.stationarity_history.last().unwrap_or(&f64::NAN),
            violation,
        };
        x.clone_from(&stage.final_controls);
        total = Some(match total {
            None => OptimizationReport {
                stages: vec![summary],
                constraint_violation: Some(violation),
                ..stage
            },
            Some(mut acc) => {
                acc.status = stage.status;
                acc.iterations += stage.iterations;
                acc.cost_history.extend(stage.cost_history);
                acc.stationarity_history.extend(stage.stationarity_history);
                acc.final_controls = stage.final_controls;
                acc.final_cost = stage.final_cost;
                acc.constraint_violation = Some(violation);
                acc.stages.push(summary);
                acc
            }
        });
    }
    let mut report = total.unwrap_or(OptimizationReport {
        status: Status::Converged,
        iterations: 0,
        cost_history: Vec::new(),
        stationarity_history: Vec::new(),
        state_solves: 0,
        adjoint_solves: 0,
        final_controls: x,
        final_cost: f64::NAN,
        constraint_violation: None,
        stages: Vec::new(),
    });
    let counts = problem.counts();
    report.state_solves = counts.state_solves;
    report.adjoint_solves = counts.adjoint_solves;
    Ok(report)
}
