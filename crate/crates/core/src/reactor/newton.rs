//! Damped Newton iteration with the natural monotonicity test.
//!
//! A trial step y + λΔy is accepted when the simplified correction
//! Δȳ = −J(y)⁻¹F(y + λΔy) satisfies ‖Δȳ‖ ≤ (1 − λ/2)‖Δy‖. Step sizes are
//! predicted and corrected from the observed contraction.

use serde::{Deserialize, Serialize};

use super::assembly::System;
use super::state::{StateVector, STRIDE, T, Y};
use super::SolveError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Stop when the max-norm of the scaled residual falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub lambda_min: f64,
    /// Damping of the first step.
    pub lambda_start: f64,
    /// Extra full steps taken after the tolerance is met, bringing the
    /// residual down to rounding level.
    pub polish_steps: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 60,
            lambda_min: 1e-8,
            lambda_start: 1.0,
            polish_steps: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Scaled residual max-norm before each iteration and at the end.
    pub residuals: Vec<f64>,
    pub damping: Vec<f64>,
    pub residual_evaluations: usize,
    /// Wall-temperature continuation stages needed after a failed cold start,
    /// 0 when Newton converged directly. `iterations` then counts all stages.
    pub continuation_stages: usize,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub state: StateVector,
    pub report: NewtonReport,
}

/// Mass fractions may undershoot their current minimum (or zero) by this
/// much within one damped step.
const Y_UNDERSHOOT: f64 = 1e-2;

/// Largest λ ≤ 1 such that y + λΔy keeps every mass fraction, including the
/// derived H2O fraction, above `min(Y, 0) − Y_UNDERSHOOT` and at least half
/// of each temperature.
fn admissible_step(y: &StateVector, dx: &[f64]) -> f64 {
    let mut lambda: f64 = 1.0;
    let mut limit = |v: f64, d: f64, floor: f64| {
        if v + d < floor {
            lambda = lambda.min((v - floor) / -d);
        }
    };
    for i in 0..y.n_nodes() {
        let t = y.t(i);
        limit(t, dx[STRIDE * i + T], 0.5 * t);
        let (mut sum, mut dsum) = (0.0, 0.0);
        for k in 0..3 {
            let (v, d) = (y.y(i, k), dx[STRIDE * i + Y + k]);
            limit(v, d, v.min(0.0) - Y_UNDERSHOOT);
            sum += v;
            dsum += d;
        }
        let v = 1.0 - sum;
        limit(v, -dsum, v.min(0.0) - Y_UNDERSHOOT);
    }
    lambda
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

impl System<'_> {
    fn weighted_norm(&self, dx: &[f64]) -> f64 {
        let s: f64 = dx
            .iter()
            .zip(self.var_scale())
            .map(|(d, w)| (d / w) * (d / w))
            .sum();
        (s / dx.len() as f64).sqrt()
    }

    pub fn newton(&self, mut y: StateVector, opts: &NewtonOptions) -> Result<Solution, SolveError> {
        self.install_dirichlet(&mut y);
        let mut f = self.scaled_residual(&y)?;
        let mut report = NewtonReport {
            iterations: 0,
            residuals: vec![max_norm(&f)],
            damping: Vec::new(),
            residual_evaluations: 1,
            continuation_stages: 0,
        };
        let mut lambda = opts.lambda_start.clamp(opts.lambda_min, 1.0);
        let mut previous: Option<(f64, Vec<f64>, f64)> = None;
        let mut polished = 0;

        for it in 0..opts.max_iter + opts.polish_steps {
            let polishing = *report.residuals.last().unwrap() <= opts.tol;
            if polishing {
                if polished == opts.polish_steps {
                    report.iterations = it;
                    return Ok(Solution { state: y, report });
                }
                polished += 1;
            } else if it >= opts.max_iter {
                break;
            }
            let lu = self
                .scaled_jacobian(&y)
                .factor()
                .map_err(|e| SolveError::Singular(e.row))?;
            let mut dx: Vec<f64> = f.iter().map(|v| -v).collect();
            lu.solve_in_place(&mut dx);
            let norm_dx = self.weighted_norm(&dx);

            if let Some((norm_prev, dxbar_prev, lambda_prev)) = &previous {
                let diff: Vec<f64> = dxbar_prev.iter().zip(&dx).map(|(a, b)| a - b).collect();
                let denom = self.weighted_norm(&diff) * norm_dx;
                let mu = if denom > 0.0 {
                    norm_prev * self.weighted_norm(dxbar_prev) / denom * lambda_prev
                } else {
                    1.0
                };
                lambda = mu.clamp(opts.lambda_min, 1.0);
            }
            if polishing {
                lambda = 1.0;
            }
            lambda = lambda.min(admissible_step(&y, &dx)).max(opts.lambda_min);

            let (y_new, f_new, dxbar) = loop {
                let mut trial = y.clone();
                for (t, d) in trial.as_mut_slice().iter_mut().zip(&dx) {
                    *t += lambda * d;
                }
                report.residual_evaluations += 1;
                let f_trial = match self.scaled_residual(&trial) {
                    Ok(v) => v,
                    Err(SolveError::NonFinite { .. }) => {
                        lambda *= 0.25;
                        if lambda < opts.lambda_min {
                            return Err(SolveError::NonConvergence {
                                iterations: it + 1,
                                residual: *report.residuals.last().unwrap(),
                            });
                        }
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let mut dxbar: Vec<f64> = f_trial.iter().map(|v| -v).collect();
                lu.solve_in_place(&mut dxbar);
                let norm_bar = self.weighted_norm(&dxbar);
                let converged_now = max_norm(&f_trial) <= opts.tol;
                if polishing
                    || norm_bar <= (1.0 - 0.5 * lambda) * norm_dx
                    || converged_now
                    || norm_dx == 0.0
                {
                    break (trial, f_trial, dxbar);
                }
                let resid: Vec<f64> = dxbar
                    .iter()
                    .zip(&dx)
                    .map(|(b, d)| b - (1.0 - lambda) * d)
                    .collect();
                let corr = 0.5 * norm_dx * lambda * lambda / self.weighted_norm(&resid);
                lambda = corr.min(0.5 * lambda).max(0.1 * lambda);
                if lambda < opts.lambda_min {
                    return Err(SolveError::NonConvergence {
                        iterations: it + 1,
                        residual: *report.residuals.last().unwrap(),
                    });
                }
            };
            report.damping.push(lambda);
            previous = Some((norm_dx, dxbar, lambda));
            y = y_new;
            f = f_new;
            report.residuals.push(max_norm(&f));
        }
        let residual = *report.residuals.last().unwrap();
        if residual <= opts.tol {
            report.iterations = report.damping.len();
            return Ok(Solution { state: y, report });
        }
        Err(SolveError::NonConvergence {
            iterations: opts.max_iter,
            residual,
        })
    }
}
