//! Wall-temperature control driving the outlet conversion towards 1 at a
//! fixed feed: J = ½(χ − 1)².

use serde::Serialize;

use super::{product_yield, solve_warm, WALL_T_MAX, WALL_T_MIN};
use crate::kinetics::KineticParams;
use crate::optim::{
    projected_lbfgs, BoxConstraint, LbfgsOptions, Objective, OptimError, OptimizationReport,
    SolveCounts,
};
use crate::reactor::{
    NewtonOptions, OperatingPoint, Reactor, SolveError, StateVector, Summary, WallLayout,
    WallTemperature,
};

pub struct TrackingProblem<'a> {
    reactor: &'a Reactor,
    flow: f64,
    layout: WallLayout,
    kinetics: KineticParams,
    newton: NewtonOptions,
    cache: Option<StateVector>,
    counts: SolveCounts,
    conversion: f64,
}

impl<'a> TrackingProblem<'a> {
    pub fn new(
        reactor: &'a Reactor,
        flow: f64,
        layout: WallLayout,
        kinetics: KineticParams,
        newton: NewtonOptions,
    ) -> Self {
        TrackingProblem {
            reactor,
            flow,
            layout,
            kinetics,
            newton,
            cache: None,
            counts: SolveCounts::default(),
            conversion: f64::NAN,
        }
    }

    pub fn bounds(&self) -> BoxConstraint {
        BoxConstraint::uniform(self.dim(), WALL_T_MIN, WALL_T_MAX).expect("valid bounds")
    }

    pub fn operating_point(&self, x: &[f64]) -> OperatingPoint {
        OperatingPoint::new(
            self.flow,
            WallTemperature::new(self.layout, x.to_vec()),
            self.kinetics,
        )
    }

    /// Conversion at the most recently evaluated controls.
    pub fn conversion(&self) -> f64 {
        self.conversion
    }
}

impl Objective for TrackingProblem<'_> {
    fn dim(&self) -> usize {
        self.layout.dim(self.reactor.mesh().n_nodes())
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        let op = self.operating_point(x);
        let sol = solve_warm(self.reactor, &op, &mut self.cache, &self.newton)?;
        self.counts.state_solves += 1;
        let y = &sol.state;
        let chi = self.reactor.conversion(y);
        self.conversion = chi;
        let sys = self.reactor.system(&op)?;
        let p = sys.solve_adjoint(y, &self.reactor.conversion_state_gradient(y))?;
        self.counts.adjoint_solves += 1;
        let mut g: Vec<f64> = sys
            .reduced_gradient(y, &p)
            .wall
            .iter()
            .map(|v| (chi - 1.0) * v)
            .collect();
        if self.layout == WallLayout::Distributed {
            g = self.reactor.mesh().riesz(&g);
        }
        Ok((0.5 * (chi - 1.0) * (chi - 1.0), g))
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.layout {
            WallLayout::Distributed => self.reactor.mesh().l2_inner(a, b),
            _ => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }

    fn counts(&self) -> SolveCounts {
        self.counts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackingResult {
    pub layout: WallLayout,
    pub flow_mln_min: f64,
    pub wall: WallTemperature,
    pub conversion: f64,
    pub product_yield: f64,
    pub summary: Summary,
    pub report: OptimizationReport,
}

/// Optimizes the wall temperature from the uniform start `t_start` (K).
pub fn run_tracking(
    reactor: &Reactor,
    flow: f64,
    layout: WallLayout,
    kinetics: KineticParams,
    t_start: f64,
    opts: &LbfgsOptions,
    newton: &NewtonOptions,
) -> Result<TrackingResult, OptimError> {
    let mut problem = TrackingProblem::new(reactor, flow, layout, kinetics, newton.clone());
    let x0 = vec![t_start; problem.dim()];
    let bounds = problem.bounds();
    let report = projected_lbfgs(&mut problem, &x0, &bounds, opts)?;
    let op = problem.operating_point(&report.final_controls);
    let sol = solve_warm(reactor, &op, &mut problem.cache, newton)?;
    let summary = reactor.summary(&sol, &op);
    Ok(TrackingResult {
        layout,
        flow_mln_min: flow,
        wall: op.wall,
        conversion: summary.conversion,
        product_yield: product_yield(reactor.molar_inflow(flow), summary.conversion),
        summary,
        report,
    })
}
