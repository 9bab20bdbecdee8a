//! Box-constrained optimization: projected L-BFGS and a Moreau–Yosida
//! penalty homotopy for a scalar state constraint.

mod homotopy;
mod lbfgs;

use serde::Serialize;
use thiserror::Error;

use crate::reactor::SolveError;

pub use homotopy::{moreau_yosida_homotopy, HomotopyOptions, PenalizedObjective, StageSummary};
pub use lbfgs::{projected_lbfgs, LbfgsOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxError {
    #[error("bounds have lengths {lower} and {upper}")]
    Length { lower: usize, upper: usize },
    #[error("lower bound {lower} exceeds upper bound {upper} at index {index}")]
    Crossed {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("bound at index {0} is NaN")]
    NaN(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("initial point has length {got}, problem has {expected} controls")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite cost or gradient at the initial point")]
    NonFiniteStart,
}

/// Componentwise bounds; either side may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxConstraint {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, BoxError> {
        if lower.len() != upper.len() {
            return Err(BoxError::Length {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(BoxError::NaN(index));
            }
            if l > u {
                return Err(BoxError::Crossed {
                    index,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(BoxConstraint { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self, BoxError> {
        BoxConstraint::new(vec![lower; n], vec![upper; n])
    }

    pub fn unbounded(n: usize) -> Self {
        BoxConstraint {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.project_in_place(&mut y);
        y
    }
}

/// Counts of the expensive operations behind an objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveCounts {
    pub state_solves: usize,
    pub adjoint_solves: usize,
}

/// Smooth cost with gradient on a control space with its own inner product.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Cost and gradient. The gradient is the Riesz representative with
    /// respect to [`Objective::inner`].
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError>;

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    fn counts(&self) -> SolveCounts {
        SolveCounts::default()
    }
}

/// ‖x − Π(x − g)‖ in the control-space norm of `obj`.
pub fn stationarity_measure<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    g: &[f64],
    bounds: &BoxConstraint,
) -> f64 {
    let step: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    let p = bounds.project(&step);
    let d: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
    obj.norm(&d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub status: Status,
    pub iterations: usize,
    pub cost_history: Vec<f64>,
    pub stationarity_history: Vec<f64>,
    pub state_solves: usize,
    pub adjoint_solves: usize,
    pub final_controls: Vec<f64>,
    pub final_cost: f64,
    /// Constraint violation after a penalty homotopy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_violation: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSummary>,
}

impl OptimizationReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

#[cfg(test)]
mod tests;
