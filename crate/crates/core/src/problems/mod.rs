//! Kinetic parameter identification, conversion tracking by wall
//! temperature and flow maximization under a conversion constraint.

pub mod experiments;
mod flow;
mod identification;
mod tracking;

use crate::reactor::{NewtonOptions, OperatingPoint, Reactor, Solution, SolveError, StateVector};
use crate::thermo::KELVIN_OFFSET;

pub use experiments::{Dataset, ExperimentError, ExperimentRecord};
pub use flow::{run_flow_maximization, FlowOptions, FlowProblem, FlowResult};
pub use identification::{
    run_identification, ExperimentFit, IdentificationProblem, IdentificationResult,
};
pub use tracking::{run_tracking, TrackingProblem, TrackingResult};

/// Admissible wall temperatures, K.
pub const WALL_T_MIN: f64 = 180.0 + KELVIN_OFFSET;
pub const WALL_T_MAX: f64 = 600.0 + KELVIN_OFFSET;

/// Initial wall temperature for the optimal control problems, K.
pub const WALL_T_START: f64 = 350.0 + KELVIN_OFFSET;

/// Molar CH4 + H2O yield, mol/s: 3χ/5 of the molar feed.
pub fn product_yield(molar_inflow: f64, conversion: f64) -> f64 {
    3.0 * conversion / 5.0 * molar_inflow
}

/// Solves from `cache` if present, falling back to a cold start, and
/// stores the converged state back into `cache`.
fn solve_warm(
    reactor: &Reactor,
    op: &OperatingPoint,
    cache: &mut Option<StateVector>,
    newton: &NewtonOptions,
) -> Result<Solution, SolveError> {
    let warm = cache
        .as_ref()
        .and_then(|g| reactor.solve(op, Some(g), newton).ok());
    let sol = match warm {
        Some(s) => s,
        None => reactor.solve(op, None, newton)?,
    };
    *cache = Some(sol.state.clone());
    Ok(sol)
}
