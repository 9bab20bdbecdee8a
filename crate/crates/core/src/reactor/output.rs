//! Derived outputs of a converged state: conversion, flows, yields and
//! conservation checks.

use serde::Serialize;

use crate::species::{NU, N_SPECIES};
use crate::thermo::density;
use crate::transport::diffusion_mix_raw;

use super::mesh::GAUSS3;
use super::state::StateVector;
use super::{OperatingPoint, Reactor, Solution};

/// Atoms (C, H, O) per molecule of CO2, H2, CH4, H2O.
const ATOMS: [[f64; N_SPECIES]; 3] = [
    [1.0, 0.0, 1.0, 0.0],
    [0.0, 2.0, 4.0, 2.0],
    [2.0, 0.0, 0.0, 1.0],
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    /// Relative spread of the discrete mass flux ρu over all elements and both ends.
    pub mass_flux_spread: f64,
    /// Largest relative mismatch of C, H, O flow between inlet and outlet.
    pub atom_balance: f64,
    /// Same, with the inlet flow taken from the feed composition alone.
    pub atom_balance_feed: f64,
    /// Smallest nodal mass fraction of any species, including derived H2O.
    pub min_mass_fraction: f64,
    /// Largest |1 − ΣY_k| over nodes.
    pub closure_error: f64,
    /// max_x |T − T_wall| at the nodes, K.
    pub max_wall_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub p: f64,
    pub u: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "Y_CO2")]
    pub y_co2: f64,
    #[serde(rename = "Y_H2")]
    pub y_h2: f64,
    #[serde(rename = "Y_CH4")]
    pub y_ch4: f64,
    #[serde(rename = "Y_H2O")]
    pub y_h2o: f64,
    pub conversion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub flow_mln_min: f64,
    pub inlet_temperature: f64,
    pub inlet_velocity: f64,
    pub conversion: f64,
    /// ρu at the outlet, kg/(m²·s).
    pub outlet_mass_flux: f64,
    /// kg/s through one channel.
    pub channel_mass_flow: f64,
    /// mol/s fed to the whole reactor.
    pub molar_inflow: f64,
    /// mol/s of CH4 and H2O leaving the whole reactor.
    pub product_yield: f64,
    pub methane_yield: f64,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub balance: BalanceReport,
}

impl Reactor {
    /// χ = 1 − Y_CO2(L) / Y_CO2,in.
    pub fn conversion(&self, y: &StateVector) -> f64 {
        let last = y.n_nodes() - 1;
        1.0 - y.y(last, 0) / self.inlet_composition().independent()[0]
    }

    fn node_mass_flux(&self, y: &StateVector, i: usize) -> f64 {
        density(self.species(), &y.y_full(i), y.t(i), self.config().p_ref) * y.u(i)
    }

    /// ρu at x = L in kg/(m²·s).
    pub fn outlet_mass_flux(&self, y: &StateVector) -> f64 {
        self.node_mass_flux(y, y.n_nodes() - 1)
    }

    /// Mass flow through one channel, kg/s.
    pub fn channel_mass_flow(&self, y: &StateVector) -> f64 {
        self.outlet_mass_flux(y) * self.config().width * self.config().height
    }

    /// Reactor-wide CH4 + H2O production in mol/s: 3χ/5 of the molar feed.
    pub fn product_yield(&self, flow_mln_min: f64, conversion: f64) -> f64 {
        3.0 * conversion / 5.0 * self.molar_inflow(flow_mln_min)
    }

    /// Quadrature average of ρu and of the total species fluxes on element `e`.
    fn element_fluxes(&self, y: &StateVector, e: usize) -> (f64, [f64; N_SPECIES]) {
        let table = self.species();
        let p_ref = self.config().p_ref;
        let h = self.mesh().h();
        let l = y.local(e);
        let mut mass = 0.0;
        let mut flux = [0.0; N_SPECIES];
        for &(xi, wq) in GAUSS3.iter() {
            let w = 0.5 * wq;
            let (pa, pb) = (0.5 * (1.0 - xi), 0.5 * (1.0 + xi));
            let n = [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)];
            let u = l[1] * n[0] + l[6] * n[1] + l[8] * n[2];
            let t = l[2] * pa + l[9] * pb;
            let mut yk = [0.0; N_SPECIES];
            let mut dy = [0.0; N_SPECIES];
            for k in 0..3 {
                yk[k] = l[3 + k] * pa + l[10 + k] * pb;
                dy[k] = (l[10 + k] - l[3 + k]) / h;
            }
            yk[3] = 1.0 - yk[0] - yk[1] - yk[2];
            dy[3] = -(dy[0] + dy[1] + dy[2]);
            let rho = density(table, &yk, t, p_ref);
            let d = diffusion_mix_raw(table, &yk, t, p_ref);
            let vc: f64 = (0..N_SPECIES).map(|k| d[k] * dy[k]).sum();
            mass += w * rho * u;
            for k in 0..N_SPECIES {
                flux[k] += w * (rho * u * yk[k] + rho * (yk[k] * vc - d[k] * dy[k]));
            }
        }
        (mass, flux)
    }

    fn atom_flows(&self, species_mass_flux: &[f64; N_SPECIES]) -> [f64; 3] {
        let m = self.species().molar_masses();
        std::array::from_fn(|a| {
            (0..N_SPECIES)
                .map(|k| ATOMS[a][k] * species_mass_flux[k] / m[k])
                .sum()
        })
    }

    pub fn balances(&self, y: &StateVector, op: &OperatingPoint) -> BalanceReport {
        let n = y.n_nodes();
        let last = n - 1;
        let mut fluxes = vec![self.node_mass_flux(y, 0), self.node_mass_flux(y, last)];
        for e in 0..n - 1 {
            fluxes.push(self.element_fluxes(y, e).0);
        }
        let mean = fluxes.iter().sum::<f64>() / fluxes.len() as f64;
        let (lo, hi) = fluxes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });

        let rhou_out = self.outlet_mass_flux(y);
        let y_out = y.y_full(last);
        let out = self.atom_flows(&std::array::from_fn(|k| rhou_out * y_out[k]));
        let inlet = self.atom_flows(&self.element_fluxes(y, 0).1);
        let feed_y = self.inlet_composition().full();
        let rhou_in = self.node_mass_flux(y, 0);
        let feed = self.atom_flows(&std::array::from_fn(|k| rhou_in * feed_y[k]));
        let rel = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
            (0..3)
                .map(|i| (a[i] - b[i]).abs() / b[i].abs())
                .fold(0.0, f64::max)
        };

        let mut min_y = f64::INFINITY;
        let mut closure: f64 = 0.0;
        let mut dev: f64 = 0.0;
        let mesh = self.mesh();
        for i in 0..n {
            let yf = y.y_full(i);
            min_y = yf.iter().fold(min_y, |a, &v| a.min(v));
            closure = closure.max((1.0 - yf.iter().sum::<f64>()).abs());
            dev = dev.max((y.t(i) - op.wall.eval(mesh, mesh.node(i))).abs());
        }
        BalanceReport {
            mass_flux_spread: (hi - lo) / mean.abs(),
            atom_balance: rel(&out, &inlet),
            atom_balance_feed: rel(&out, &feed),
            min_mass_fraction: min_y,
            closure_error: closure,
            max_wall_deviation: dev,
        }
    }

    pub fn profile(&self, y: &StateVector) -> Vec<ProfileRow> {
        let y_in = self.inlet_composition().independent()[0];
        (0..y.n_nodes())
            .map(|i| {
                let yf = y.y_full(i);
                ProfileRow {
                    x: self.mesh().node(i),
                    p: y.p(i),
                    u: y.u(i),
                    t: y.t(i),
                    y_co2: yf[0],
                    y_h2: yf[1],
                    y_ch4: yf[2],
                    y_h2o: yf[3],
                    conversion: 1.0 - yf[0] / y_in,
                }
            })
            .collect()
    }

    pub fn summary(&self, sol: &Solution, op: &OperatingPoint) -> Summary {
        let y = &sol.state;
        let chi = self.conversion(y);
        let n_in = self.molar_inflow(op.flow_mln_min);
        let t_in = op.wall.inlet();
        Summary {
            flow_mln_min: op.flow_mln_min,
            inlet_temperature: t_in,
            inlet_velocity: self.inlet_velocity(op.flow_mln_min, t_in),
            conversion: chi,
            outlet_mass_flux: self.outlet_mass_flux(y),
            channel_mass_flow: self.channel_mass_flow(y),
            molar_inflow: n_in,
            product_yield: self.product_yield(op.flow_mln_min, chi),
            methane_yield: -NU[0] * chi / 5.0 * n_in,
            newton_iterations: sol.report.iterations,
            final_residual: *sol.report.residuals.last().unwrap_or(&f64::NAN),
            balance: self.balances(y, op),
        }
    }
}
