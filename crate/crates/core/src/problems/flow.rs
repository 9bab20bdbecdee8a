//! Flow maximization: minimize −ρu(L) over [feed, wall temperature] subject
//! to χ ≥ χ_des, with the constraint penalized as (γ/2)·max(0, χ_des − χ)².
//!
//! Controls are x = [feed in mL/min, wall values in K...].

use serde::Serialize;

use super::{product_yield, solve_warm, WALL_T_MAX, WALL_T_MIN};
use crate::kinetics::KineticParams;
use crate::optim::{
    moreau_yosida_homotopy, BoxConstraint, HomotopyOptions, Objective, OptimError,
    OptimizationReport, PenalizedObjective, SolveCounts,
};
use crate::reactor::{
    NewtonOptions, OperatingPoint, Reactor, SolveError, StateVector, Summary, WallLayout,
    WallTemperature,
};

pub struct FlowProblem<'a> {
    reactor: &'a Reactor,
    chi_des: f64,
    layout: WallLayout,
    kinetics: KineticParams,
    newton: NewtonOptions,
    gamma: f64,
    cache: Option<StateVector>,
    counts: SolveCounts,
    conversion: f64,
}

impl<'a> FlowProblem<'a> {
    pub fn new(
        reactor: &'a Reactor,
        chi_des: f64,
        layout: WallLayout,
        kinetics: KineticParams,
        newton: NewtonOptions,
    ) -> Self {
        FlowProblem {
            reactor,
            chi_des,
            layout,
            kinetics,
            newton,
            gamma: 1.0,
            cache: None,
            counts: SolveCounts::default(),
            conversion: f64::NAN,
        }
    }

    pub fn bounds(&self, flow_min: f64, flow_max: f64) -> BoxConstraint {
        let n = self.dim();
        let mut lo = vec![WALL_T_MIN; n];
        let mut hi = vec![WALL_T_MAX; n];
        lo[0] = flow_min;
        hi[0] = flow_max;
        BoxConstraint::new(lo, hi).expect("valid bounds")
    }

    pub fn operating_point(&self, x: &[f64]) -> OperatingPoint {
        OperatingPoint::new(
            x[0],
            WallTemperature::new(self.layout, x[1..].to_vec()),
            self.kinetics,
        )
    }

    pub fn conversion(&self) -> f64 {
        self.conversion
    }
}

impl Objective for FlowProblem<'_> {
    fn dim(&self) -> usize {
        1 + self.layout.dim(self.reactor.mesh().n_nodes())
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        let op = self.operating_point(x);
        let sol = solve_warm(self.reactor, &op, &mut self.cache, &self.newton)?;
        self.counts.state_solves += 1;
        let r = self.reactor;
        let y = &sol.state;
        let chi = r.conversion(y);
        self.conversion = chi;
        let v = (self.chi_des - chi).max(0.0);
        let cost = -r.outlet_mass_flux(y) + 0.5 * self.gamma * v * v;

        let mut dj = r.outlet_mass_flux_state_gradient(y);
        for d in dj.iter_mut() {
            *d = -*d;
        }
        if v > 0.0 {
            for (d, c) in dj.iter_mut().zip(r.conversion_state_gradient(y)) {
                *d -= self.gamma * v * c;
            }
        }
        let sys = r.system(&op)?;
        let p = sys.solve_adjoint(y, &dj)?;
        self.counts.adjoint_solves += 1;
        let rg = sys.reduced_gradient(y, &p);
        let wall = if self.layout == WallLayout::Distributed {
            r.mesh().riesz(&rg.wall)
        } else {
            rg.wall
        };
        let mut g = Vec::with_capacity(self.dim());
        g.push(rg.flow);
        g.extend(wall);
        Ok((cost, g))
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let rest = match self.layout {
            WallLayout::Distributed => self.reactor.mesh().l2_inner(&a[1..], &b[1..]),
            _ => a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum(),
        };
        a[0] * b[0] + rest
    }

    fn counts(&self) -> SolveCounts {
        self.counts
    }
}

impl PenalizedObjective for FlowProblem<'_> {
    fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
    }

    fn constraint_violation(&self) -> f64 {
        (self.chi_des - self.conversion).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowOptions {
    pub homotopy: HomotopyOptions,
    /// Lower feed bound, mL/min.
    pub flow_min: f64,
    /// First upper feed bound, raised by `flow_step` while the optimum sits on it.
    pub flow_max_start: f64,
    pub flow_step: f64,
    pub flow_max_cap: f64,
    /// Initial feed and uniform wall temperature.
    pub flow_start: f64,
    pub t_start: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowResult {
    pub chi_des: f64,
    pub layout: WallLayout,
    pub flow_mln_min: f64,
    pub wall: WallTemperature,
    pub conversion: f64,
    /// χ − χ_des at the optimum.
    pub constraint_gap: f64,
    pub product_yield: f64,
    /// Final upper feed bound.
    pub flow_max: f64,
    /// Number of homotopy runs, one per upper bound tried.
    pub rounds: usize,
    pub summary: Summary,
    pub report: OptimizationReport,
}

pub fn run_flow_maximization(
    reactor: &Reactor,
    chi_des: f64,
    layout: WallLayout,
    kinetics: KineticParams,
    opts: &FlowOptions,
    newton: &NewtonOptions,
) -> Result<FlowResult, OptimError> {
    let mut flow_max = opts.flow_max_start;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut problem = FlowProblem::new(reactor, chi_des, layout, kinetics, newton.clone());
        let mut x0 = vec![opts.t_start; problem.dim()];
        x0[0] = opts.flow_start.min(flow_max);
        let bounds = problem.bounds(opts.flow_min, flow_max);
        let report = moreau_yosida_homotopy(&mut problem, &x0, &bounds, &opts.homotopy)?;
        let x = &report.final_controls;
        let at_bound = x[0] >= flow_max - 1e-9;
        if at_bound && flow_max + opts.flow_step <= opts.flow_max_cap {
            flow_max += opts.flow_step;
            continue;
        }
        let op = problem.operating_point(x);
        let sol = solve_warm(reactor, &op, &mut problem.cache, newton)?;
        let summary = reactor.summary(&sol, &op);
        return Ok(FlowResult {
            chi_des,
            layout,
            flow_mln_min: x[0],
            wall: op.wall,
            conversion: summary.conversion,
            constraint_gap: summary.conversion - chi_des,
            product_yield: product_yield(reactor.molar_inflow(x[0]), summary.conversion),
            flow_max,
            rounds,
            summary,
            report,
        });
    }
}

impl FlowOptions {
    /// γ = 10^l (l = 0..6) for staged walls and 7^l (l = 0..7) for the
    /// distributed wall, inner tolerance 1e-2. Stages whose stationarity is
    /// already below the cost noise level stop immediately.
    pub fn for_layout(layout: WallLayout) -> Self {
        let inner = crate::optim::LbfgsOptions {
            tol_rel: 1e-2,
            tol_abs: 1e-6,
            ..Default::default()
        };
        let homotopy = match layout {
            WallLayout::Distributed => HomotopyOptions::geometric(7.0, 7, inner),
            _ => HomotopyOptions::geometric(10.0, 6, inner),
        };
        FlowOptions {
            homotopy,
            flow_min: 50.0,
            flow_max_start: 150.0,
            flow_step: 50.0,
            flow_max_cap: 500.0,
            flow_start: 150.0,
            t_start: super::WALL_T_START,
        }
    }
}
