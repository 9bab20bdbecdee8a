//! Discrete adjoint solves and reduced gradients with respect to the
//! operating-point controls.

use serde::Serialize;

use crate::dual::{Dual, Scalar};
use crate::thermo::density;

use super::assembly::System;
use super::state::{StateVector, STRIDE};
use super::{Reactor, SolveError};

/// Gradient of a reduced cost with respect to the operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlGradient {
    /// With respect to (E_a [J/mol], ln A, n).
    pub kinetics: [f64; 3],
    /// With respect to the wall-temperature values, including their effect
    /// on the inlet temperature and velocity.
    pub wall: Vec<f64>,
    /// With respect to the feed in mL/min.
    pub flow: f64,
}

impl System<'_> {
    /// Solves Jᵀ p = −∂J/∂y at the state `y`.
    pub fn solve_adjoint(&self, y: &StateVector, dj_dy: &[f64]) -> Result<Vec<f64>, SolveError> {
        let lu = self
            .scaled_jacobian(y)
            .factor()
            .map_err(|e| SolveError::Singular(e.row))?;
        let mut q: Vec<f64> = dj_dy.iter().map(|v| -v).collect();
        lu.solve_transpose_in_place(&mut q);
        for (v, s) in q.iter_mut().zip(self.row_scale()) {
            *v *= s;
        }
        Ok(q)
    }

    /// pᵀ ∂R/∂(controls), expressed in the operating-point variables.
    pub fn reduced_gradient(&self, y: &StateVector, p: &[f64]) -> ControlGradient {
        let vjp = self.control_vjp(y, p);
        let op = self.operating_point();
        let mut wall = vjp.wall;
        // the inlet value fixes T_in, and u_in ∝ T_in at fixed feed
        wall[0] += vjp.t_in + vjp.u_in * self.u_in / self.t_in;
        ControlGradient {
            kinetics: vjp.kinetics,
            wall,
            flow: vjp.u_in * self.u_in / op.flow_mln_min,
        }
    }
}

impl ControlGradient {
    pub fn add_scaled(&mut self, other: &ControlGradient, c: f64) {
        for (a, b) in self.kinetics.iter_mut().zip(&other.kinetics) {
            *a += c * b;
        }
        for (a, b) in self.wall.iter_mut().zip(&other.wall) {
            *a += c * b;
        }
        self.flow += c * other.flow;
    }
}

impl Reactor {
    /// ∂χ/∂y, nonzero only at the outlet CO2 dof.
    pub fn conversion_state_gradient(&self, y: &StateVector) -> Vec<f64> {
        let mut g = vec![0.0; y.as_slice().len()];
        let last = y.n_nodes() - 1;
        g[STRIDE * last + super::state::Y] = -1.0 / self.inlet_composition().independent()[0];
        g
    }

    /// ∂(ρu)(L)/∂y.
    pub fn outlet_mass_flux_state_gradient(&self, y: &StateVector) -> Vec<f64> {
        let mut g = vec![0.0; y.as_slice().len()];
        let last = y.n_nodes() - 1;
        let base = STRIDE * last;
        let v: [Dual<5>; 5] = std::array::from_fn(|i| Dual::var(y.as_slice()[base + 1 + i], i));
        let yf = [v[2], v[3], v[4], Dual::cst(1.0) - v[2] - v[3] - v[4]];
        let rhou = density(self.species(), &yf, v[1], self.config().p_ref) * v[0];
        for i in 0..5 {
            g[base + 1 + i] = rhou.eps[i];
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::KineticParams;
    use crate::reactor::{
        NewtonOptions, OperatingPoint, ReactorConfig, WallLayout, WallTemperature,
    };

    fn reactor() -> Reactor {
        Reactor::new(ReactorConfig {
            n_nodes: 81,
            ..ReactorConfig::default()
        })
        .unwrap()
    }

    fn opts() -> NewtonOptions {
        NewtonOptions {
            tol: 1e-12,
            ..NewtonOptions::default()
        }
    }

    fn costs(r: &Reactor, op: &OperatingPoint) -> (f64, f64) {
        let y = r.solve(op, None, &opts()).unwrap().state;
        (r.conversion(&y), r.outlet_mass_flux(&y))
    }

    #[test]
    fn reduced_gradients_match_finite_differences() {
        let r = reactor();
        let op = OperatingPoint::new(
            90.0,
            WallTemperature::new(WallLayout::TwoStage, vec![640.0, 600.0]),
            KineticParams::reference(),
        );
        let y = r.solve(&op, None, &opts()).unwrap().state;
        let sys = r.system(&op).unwrap();
        let p_chi = sys
            .solve_adjoint(&y, &r.conversion_state_gradient(&y))
            .unwrap();
        let g_chi = sys.reduced_gradient(&y, &p_chi);
        let p_m = sys
            .solve_adjoint(&y, &r.outlet_mass_flux_state_gradient(&y))
            .unwrap();
        let g_m = sys.reduced_gradient(&y, &p_m);

        type Perturb = fn(&mut OperatingPoint, f64);
        let cases: [(Perturb, f64, f64, f64); 6] = [
            (
                |o, h| o.kinetics.activation_energy += h,
                2.0,
                g_chi.kinetics[0],
                g_m.kinetics[0],
            ),
            (
                |o, h| o.kinetics.log_pre_exponential += h,
                1e-3,
                g_chi.kinetics[1],
                g_m.kinetics[1],
            ),
            (
                |o, h| o.kinetics.exponent += h,
                1e-5,
                g_chi.kinetics[2],
                g_m.kinetics[2],
            ),
            (
                |o, h| o.wall.values[0] += h,
                1e-2,
                g_chi.wall[0],
                g_m.wall[0],
            ),
            (
                |o, h| o.wall.values[1] += h,
                1e-2,
                g_chi.wall[1],
                g_m.wall[1],
            ),
            (|o, h| o.flow_mln_min += h, 1e-2, g_chi.flow, g_m.flow),
        ];
        for (i, (perturb, h, gc, gm)) in cases.into_iter().enumerate() {
            let mut plus = op.clone();
            perturb(&mut plus, h);
            let mut minus = op.clone();
            perturb(&mut minus, -h);
            let (cp, mp) = costs(&r, &plus);
            let (cm, mm) = costs(&r, &minus);
            let fc = (cp - cm) / (2.0 * h);
            let fm = (mp - mm) / (2.0 * h);
            assert!(
                (fc - gc).abs() <= 1e-6 * gc.abs(),
                "case {i} conversion: {gc} vs {fc}"
            );
            assert!(
                (fm - gm).abs() <= 1e-6 * gm.abs() + 1e-10,
                "case {i} mass flux: {gm} vs {fm}"
            );
        }
    }

    #[test]
    fn adjoint_is_linear_and_vanishes_for_state_free_costs() {
        let r = reactor();
        let op = OperatingPoint::isothermal(100.0, 325.0, KineticParams::reference());
        let y = r.solve(&op, None, &opts()).unwrap().state;
        let sys = r.system(&op).unwrap();
        let zero = sys.solve_adjoint(&y, &vec![0.0; sys.n_dofs()]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let a = r.conversion_state_gradient(&y);
        let b = r.outlet_mass_flux_state_gradient(&y);
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, z)| x + 3.0 * z).collect();
        let pa = sys.solve_adjoint(&y, &a).unwrap();
        let pb = sys.solve_adjoint(&y, &b).unwrap();
        let pab = sys.solve_adjoint(&y, &ab).unwrap();
        let scale = pab.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..pab.len() {
            assert!((pab[i] - pa[i] - 3.0 * pb[i]).abs() <= 1e-10 * scale);
        }
        // the adjoint satisfies Jᵀp = −∂J/∂y
        let jt = sys.jacobian(&y).matvec_transpose(&pa);
        let s = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..jt.len() {
            assert!((jt[i] + a[i]).abs() <= 1e-9 * s, "row {i}");
        }
    }

    #[test]
    fn inert_kinetics_give_zero_kinetic_gradient() {
        let r = reactor();
        let op = OperatingPoint::isothermal(100.0, 325.0, KineticParams::inert());
        let sol = r.solve(&op, None, &opts()).unwrap();
        assert!(sol.report.iterations <= 5);
        let y = sol.state;
        assert!(r.conversion(&y).abs() < 1e-12);
        let sys = r.system(&op).unwrap();
        let p = sys
            .solve_adjoint(&y, &r.conversion_state_gradient(&y))
            .unwrap();
        let g = sys.reduced_gradient(&y, &p);
        assert_eq!(g.kinetics, [0.0; 3]);
    }
}
