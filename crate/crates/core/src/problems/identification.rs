//! Least-squares fit of (E_a, ln A, n) to measured outlet conversions.
//!
//! Controls are x = [E_a in kJ/mol, ln A, n].

use serde::Serialize;

use super::{solve_warm, Dataset};
use crate::kinetics::KineticParams;
use crate::optim::{
    projected_lbfgs, BoxConstraint, LbfgsOptions, Objective, OptimError, OptimizationReport,
    SolveCounts,
};
use crate::reactor::{NewtonOptions, Reactor, SolveError, StateVector};

pub struct IdentificationProblem<'a> {
    reactor: &'a Reactor,
    data: &'a Dataset,
    newton: NewtonOptions,
    caches: Vec<Option<StateVector>>,
    counts: SolveCounts,
    simulated: Vec<f64>,
}

struct Local {
    conversion: f64,
    gradient: [f64; 3],
}

impl<'a> IdentificationProblem<'a> {
    pub fn new(reactor: &'a Reactor, data: &'a Dataset, newton: NewtonOptions) -> Self {
        IdentificationProblem {
            reactor,
            data,
            newton,
            caches: vec![None; data.len()],
            counts: SolveCounts::default(),
            simulated: Vec::new(),
        }
    }

    pub fn to_params(x: &[f64]) -> KineticParams {
        KineticParams {
            activation_energy: x[0] * 1e3,
            log_pre_exponential: x[1],
            exponent: x[2],
        }
    }

    pub fn to_controls(p: &KineticParams) -> Vec<f64> {
        vec![
            p.activation_energy * 1e-3,
            p.log_pre_exponential,
            p.exponent,
        ]
    }

    /// E_a ≥ 0 and n ≥ 0; ln A is free.
    pub fn bounds() -> BoxConstraint {
        BoxConstraint::new(vec![0.0, f64::NEG_INFINITY, 0.0], vec![f64::INFINITY; 3])
            .expect("valid bounds")
    }

    /// Conversions of the most recent evaluation, in dataset order.
    pub fn simulated(&self) -> &[f64] {
        &self.simulated
    }

    fn run(&mut self, x: &[f64]) -> Result<Vec<Local>, SolveError> {
        let params = Self::to_params(x);
        let reactor = self.reactor;
        let newton = &self.newton;
        let work = |(rec, cache): (
            &crate::problems::ExperimentRecord,
            &mut Option<StateVector>,
        )|
         -> Result<Local, SolveError> {
            let op = rec.operating_point(params);
            let sol = solve_warm(reactor, &op, cache, newton)?;
            let y = &sol.state;
            let sys = reactor.system(&op)?;
            let p = sys.solve_adjoint(y, &reactor.conversion_state_gradient(y))?;
            let g = sys.reduced_gradient(y, &p);
            Ok(Local {
                conversion: reactor.conversion(y),
                gradient: [g.kinetics[0] * 1e3, g.kinetics[1], g.kinetics[2]],
            })
        };
        let pairs = self.data.records().iter().zip(self.caches.iter_mut());
        #[cfg(feature = "parallel")]
        let out: Result<Vec<Local>, SolveError> = {
            use rayon::prelude::*;
            pairs
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(work)
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let out: Result<Vec<Local>, SolveError> = pairs.map(work).collect();
        self.counts.state_solves += self.data.len();
        self.counts.adjoint_solves += self.data.len();
        out
    }
}

impl Objective for IdentificationProblem<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        let locals = self.run(x)?;
        let mut cost = 0.0;
        let mut grad = vec![0.0; 3];
        for (l, rec) in locals.iter().zip(self.data.records()) {
            let r = l.conversion - rec.conversion;
            cost += 0.5 * r * r;
            for (g, d) in grad.iter_mut().zip(&l.gradient) {
                *g += r * d;
            }
        }
        self.simulated = locals.iter().map(|l| l.conversion).collect();
        Ok((cost, grad))
    }

    fn counts(&self) -> SolveCounts {
        self.counts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentFit {
    pub id: u32,
    #[serde(rename = "T_wall_C")]
    pub t_wall_c: f64,
    pub flow_mln_min: f64,
    pub measured: f64,
    pub simulated: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentificationResult {
    pub params: KineticParams,
    pub fits: Vec<ExperimentFit>,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// State plus adjoint solves over the whole run.
    pub total_solves: usize,
    pub report: OptimizationReport,
}

pub fn run_identification(
    reactor: &Reactor,
    data: &Dataset,
    start: &KineticParams,
    opts: &LbfgsOptions,
    newton: &NewtonOptions,
) -> Result<IdentificationResult, OptimError> {
    let mut problem = IdentificationProblem::new(reactor, data, newton.clone());
    let report = projected_lbfgs(
        &mut problem,
        &IdentificationProblem::to_controls(start),
        &IdentificationProblem::bounds(),
        opts,
    )?;
    let params = IdentificationProblem::to_params(&report.final_controls);
    problem.evaluate(&report.final_controls)?;
    let fits: Vec<ExperimentFit> = data
        .records()
        .iter()
        .zip(problem.simulated())
        .map(|(r, &s)| ExperimentFit {
            id: r.id,
            t_wall_c: r.t_wall_c,
            flow_mln_min: r.flow,
            measured: r.conversion,
            simulated: s,
            error: s - r.conversion,
        })
        .collect();
    let n = fits.len() as f64;
    let mean_abs_error = fits.iter().map(|f| f.error.abs()).sum::<f64>() / n;
    let max_abs_error = fits.iter().fold(0.0f64, |m, f| m.max(f.error.abs()));
    Ok(IdentificationResult {
        params,
        fits,
        mean_abs_error,
        max_abs_error,
        total_solves: report.state_solves + report.adjoint_solves,
        report,
    })
}
