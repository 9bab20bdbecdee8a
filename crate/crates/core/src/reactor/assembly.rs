//! Weak-form residual, its exact Jacobian and control sensitivities.
//!
//! Per element and quadrature point, with P1 test functions φ and P2 test
//! functions N:
//!
//! * continuity   −ρu φ'
//! * momentum     ρuu' N − p N' + (4/3)μu' N' + (μ/K)u N
//! * temperature  (ρc_p u T' + h_fs(T − T_wall) − ω_Tr − ω_Td) φ + κT' φ'
//! * species      −(ρuY_k + j_k) φ' − ω_k φ,  j_k = ρ(Y_k V^c − D_k Y_k')
//!
//! plus outflow terms ρu and ρuY_k at x = L and the inflow term −ρu at the
//! inlet of the continuity equation. Inlet rows of u, T and Y hold Dirichlet
//! conditions.

use crate::dual::{Dual, Scalar};
use crate::kinetics::{rate_of_progress, Kinetics};
use crate::linalg::BandMatrix;
use crate::species::{Species, SpeciesTable, NU, N_SPECIES};
use crate::thermo::{cp_species, density, h_species};
use crate::transport::{conductivity_mix_raw, diffusion_mix_raw, viscosity_mix_raw};

use super::mesh::GAUSS3;
use super::state::{self, StateVector, LOCAL, STRIDE};
use super::{Block, OperatingPoint, Reactor, SolveError};

/// Band half-width of the interleaved layout.
pub const BANDWIDTH: usize = LOCAL - 1;

struct ElementCtx<'a> {
    table: &'a SpeciesTable,
    h: f64,
    p_ref: f64,
    inv_perm: f64,
    h_fs: f64,
    react: [bool; 3],
}

/// Element residual (13 rows) and the implied H2O rows at both nodes.
fn element_residual<S: Scalar>(
    c: &ElementCtx,
    l: &[S; LOCAL],
    tw: &[S; 3],
    kin: &Kinetics<S>,
) -> ([S; LOCAL], [S; 2]) {
    let mut r = [S::zero(); LOCAL];
    let mut h2o = [S::zero(); 2];
    let h = c.h;
    let table = c.table;
    let m = table.molar_masses();
    for (q, &(xi, wq)) in GAUSS3.iter().enumerate() {
        let jw = wq * 0.5 * h;
        let phi = [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)];
        let dphi = [-1.0 / h, 1.0 / h];
        let n = [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)];
        let dn = [(2.0 * xi - 1.0) / h, -4.0 * xi / h, (2.0 * xi + 1.0) / h];

        let p = l[0] * phi[0] + l[7] * phi[1];
        let u = l[1] * n[0] + l[6] * n[1] + l[8] * n[2];
        let du = l[1] * dn[0] + l[6] * dn[1] + l[8] * dn[2];
        let t = l[2] * phi[0] + l[9] * phi[1];
        let dt = (l[9] - l[2]) / h;
        let mut y = [S::zero(); N_SPECIES];
        let mut dy = [S::zero(); N_SPECIES];
        for k in 0..3 {
            y[k] = l[3 + k] * phi[0] + l[10 + k] * phi[1];
            dy[k] = (l[10 + k] - l[3 + k]) / h;
        }
        y[3] = S::cst(1.0) - y[0] - y[1] - y[2];
        dy[3] = -(dy[0] + dy[1] + dy[2]);

        let rho = density(table, &y, t, c.p_ref);
        let mu = viscosity_mix_raw(table, &y, t);
        let kappa = conductivity_mix_raw(table, &y, t);
        let d = diffusion_mix_raw(table, &y, t, c.p_ref);
        let cpk: [S; N_SPECIES] = std::array::from_fn(|k| cp_species(table, Species::ALL[k], t));
        let mut cp = S::zero();
        let mut vc = S::zero();
        for k in 0..N_SPECIES {
            cp += y[k] * cpk[k];
            vc += d[k] * dy[k];
        }
        let j: [S; N_SPECIES] = std::array::from_fn(|k| rho * (y[k] * vc - d[k] * dy[k]));
        let mut omega_td = S::zero();
        for k in 0..N_SPECIES {
            omega_td -= cpk[k] * j[k];
        }
        omega_td *= dt;

        let mut omega = [S::zero(); N_SPECIES];
        let mut omega_tr = S::zero();
        if c.react[q] {
            let qr = rate_of_progress(table, &y, t, rho, kin);
            for k in 0..N_SPECIES {
                omega[k] = qr * (m[k] * NU[k]);
                omega_tr -= h_species(table, Species::ALL[k], t) * omega[k];
            }
        }

        let rhou = rho * u;
        let mom_src = rhou * du + mu * u * c.inv_perm;
        let visc = mu * du * (4.0 / 3.0);
        let t_src = rho * cp * u * dt + (t - tw[q]) * c.h_fs - omega_tr - omega_td;
        let t_flux = kappa * dt;
        let y_flux: [S; N_SPECIES] = std::array::from_fn(|k| rhou * y[k] + j[k]);

        for a in 0..2 {
            let o = STRIDE * a;
            r[o] -= rhou * (dphi[a] * jw);
            r[o + 2] += (t_src * phi[a] + t_flux * dphi[a]) * jw;
            for k in 0..3 {
                r[o + 3 + k] -= (y_flux[k] * dphi[a] + omega[k] * phi[a]) * jw;
            }
            h2o[a] -= (y_flux[3] * dphi[a] + omega[3] * phi[a]) * jw;
        }
        for (slot, b) in [(1usize, 0usize), (6, 1), (8, 2)] {
            r[slot] += (mom_src * n[b] + (visc - p) * dn[b]) * jw;
        }
    }
    (r, h2o)
}

/// ρu and ρuY_k at one node, for the boundary terms.
fn node_fluxes<S: Scalar>(table: &SpeciesTable, p_ref: f64, node: &[S; 6]) -> (S, [S; N_SPECIES]) {
    let y = [
        node[3],
        node[4],
        node[5],
        S::cst(1.0) - node[3] - node[4] - node[5],
    ];
    let rhou = density(table, &y, node[2], p_ref) * node[1];
    (rhou, std::array::from_fn(|k| rhou * y[k]))
}

fn seed<const N: usize>(vals: &[f64], offset: usize) -> [Dual<N>; LOCAL] {
    std::array::from_fn(|i| {
        if i >= offset && i - offset < N {
            Dual::var(vals[i], i - offset)
        } else {
            Dual::constant(vals[i])
        }
    })
}

/// λᵀ ∂R/∂(control) for every control the residual depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlVjp {
    /// With respect to (E_a [J/mol], ln A, n).
    pub kinetics: [f64; 3],
    /// With respect to each free wall-temperature value (through the h_fs term only).
    pub wall: Vec<f64>,
    /// With respect to the Dirichlet inlet velocity.
    pub u_in: f64,
    /// With respect to the Dirichlet inlet temperature.
    pub t_in: f64,
}

/// Residual evaluator bound to one reactor and one operating point.
pub struct System<'a> {
    reactor: &'a Reactor,
    op: &'a OperatingPoint,
    pub u_in: f64,
    pub t_in: f64,
    pub y_in: [f64; 3],
    wall_q: Vec<[f64; 3]>,
    react: Vec<[bool; 3]>,
    row_scale: Vec<f64>,
    var_scale: Vec<f64>,
}

impl<'a> System<'a> {
    pub(super) fn new(reactor: &'a Reactor, op: &'a OperatingPoint) -> Self {
        let mesh = reactor.mesh();
        let cfg = reactor.config();
        let t_in = op.wall.inlet();
        let u_in = reactor.inlet_velocity(op.flow_mln_min, t_in);
        let y_in = reactor.inlet_composition().independent();
        let n_el = mesh.n_elements();
        let mut wall_q = Vec::with_capacity(n_el);
        let mut react = Vec::with_capacity(n_el);
        for e in 0..n_el {
            let xq = mesh.quad_points(e);
            wall_q.push(xq.map(|x| op.wall.eval(mesh, x)));
            react.push(xq.map(|x| x > 0.0));
        }

        let table = reactor.species();
        let y_full = reactor.inlet_composition().full();
        let rho_in = density(table, &y_full, t_in, cfg.p_ref);
        let mu_in = viscosity_mix_raw(table, &y_full, t_in);
        let h = mesh.h();
        let mass = rho_in * u_in;
        let drag = mu_in / cfg.permeability * u_in;
        let heat = cfg.heat_transfer * t_in * h;
        let p_star = drag * (mesh.x_end() - mesh.x_start());

        let n = state::n_dofs(mesh.n_nodes());
        let mut row_scale = vec![0.0; n];
        let mut var_scale = vec![0.0; n];
        for i in 0..n {
            let (rs, vs) = match i % STRIDE {
                state::P => (1.0 / mass, p_star),
                state::U | state::U_MID => (1.0 / (drag * h), u_in),
                state::T => (1.0 / heat, t_in),
                _ => (1.0 / mass, 1.0),
            };
            row_scale[i] = rs;
            var_scale[i] = vs;
        }
        row_scale[state::U] = 1.0 / u_in;
        row_scale[state::T] = 1.0 / t_in;
        for k in 0..3 {
            row_scale[state::Y + k] = 1.0;
        }

        System {
            reactor,
            op,
            u_in,
            t_in,
            y_in,
            wall_q,
            react,
            row_scale,
            var_scale,
        }
    }

    pub fn reactor(&self) -> &Reactor {
        self.reactor
    }

    pub fn operating_point(&self) -> &OperatingPoint {
        self.op
    }

    pub fn n_dofs(&self) -> usize {
        self.row_scale.len()
    }

    /// Row scaling that makes every block dimensionless.
    pub fn row_scale(&self) -> &[f64] {
        &self.row_scale
    }

    /// Characteristic magnitudes of the unknowns.
    pub fn var_scale(&self) -> &[f64] {
        &self.var_scale
    }

    fn ctx(&self, e: usize) -> ElementCtx<'_> {
        let cfg = self.reactor.config();
        ElementCtx {
            table: self.reactor.species(),
            h: self.reactor.mesh().h(),
            p_ref: cfg.p_ref,
            inv_perm: 1.0 / cfg.permeability,
            h_fs: cfg.heat_transfer,
            react: self.react[e],
        }
    }

    fn dirichlet_rows() -> [usize; 5] {
        [state::U, state::T, state::Y, state::Y + 1, state::Y + 2]
    }

    fn last_node(&self) -> usize {
        self.reactor.mesh().n_nodes() - 1
    }

    /// Writes the inlet Dirichlet values into `y`.
    pub fn install_dirichlet(&self, y: &mut StateVector) {
        y.set_u(0, self.u_in);
        y.set_t(0, self.t_in);
        for k in 0..3 {
            y.set_y(0, k, self.y_in[k]);
        }
    }

    /// Residual before the Dirichlet rows are substituted, and the H2O rows.
    pub fn residual_unconstrained(&self, y: &StateVector) -> (Vec<f64>, Vec<f64>) {
        let n_el = self.reactor.mesh().n_elements();
        let mut r = vec![0.0; self.n_dofs()];
        let mut h2o = vec![0.0; n_el + 1];
        let kin = self.op.kinetics.lift::<f64>();
        for e in 0..n_el {
            let (re, he) = element_residual(&self.ctx(e), &y.local(e), &self.wall_q[e], &kin);
            let base = STRIDE * e;
            for (i, v) in re.iter().enumerate() {
                r[base + i] += v;
            }
            h2o[e] += he[0];
            h2o[e + 1] += he[1];
        }
        let cfg = self.reactor.config();
        let table = self.reactor.species();
        let node =
            |i: usize| -> [f64; 6] { y.as_slice()[STRIDE * i..STRIDE * i + 6].try_into().unwrap() };
        let (rhou0, _) = node_fluxes(table, cfg.p_ref, &node(0));
        r[state::P] -= rhou0;
        let last = self.last_node();
        let (rhou, flux) = node_fluxes(table, cfg.p_ref, &node(last));
        r[STRIDE * last + state::P] += rhou;
        for k in 0..3 {
            r[STRIDE * last + state::Y + k] += flux[k];
        }
        h2o[last] += flux[3];
        (r, h2o)
    }

    /// Full residual with Dirichlet rows.
    pub fn residual(&self, y: &StateVector) -> Result<Vec<f64>, SolveError> {
        let (mut r, _) = self.residual_unconstrained(y);
        r[state::U] = y.u(0) - self.u_in;
        r[state::T] = y.t(0) - self.t_in;
        for k in 0..3 {
            r[state::Y + k] = y.y(0, k) - self.y_in[k];
        }
        if let Some(i) = r.iter().position(|v| !v.is_finite()) {
            let block = match i % STRIDE {
                state::P => Block::Continuity,
                state::U | state::U_MID => Block::Momentum,
                state::T => Block::Temperature,
                _ => Block::Species,
            };
            return Err(SolveError::NonFinite {
                block,
                node: i / STRIDE,
            });
        }
        Ok(r)
    }

    pub fn scaled_residual(&self, y: &StateVector) -> Result<Vec<f64>, SolveError> {
        let mut r = self.residual(y)?;
        for (v, s) in r.iter_mut().zip(&self.row_scale) {
            *v *= s;
        }
        Ok(r)
    }

    /// Exact Jacobian ∂R/∂y by forward-mode differentiation of the assembly.
    pub fn jacobian(&self, y: &StateVector) -> BandMatrix {
        let n = self.n_dofs();
        let mut jac = BandMatrix::zeros(n, BANDWIDTH, BANDWIDTH);
        let kin = self.op.kinetics.lift::<Dual<LOCAL>>();
        for e in 0..self.reactor.mesh().n_elements() {
            let local = y.local(e);
            let l = seed::<LOCAL>(&local, 0);
            let tw = self.wall_q[e].map(Dual::constant);
            let (re, _) = element_residual(&self.ctx(e), &l, &tw, &kin);
            let base = STRIDE * e;
            for (i, ri) in re.iter().enumerate() {
                for (j, d) in ri.eps.iter().enumerate() {
                    if *d != 0.0 {
                        jac.add(base + i, base + j, *d);
                    }
                }
            }
        }
        let cfg = self.reactor.config();
        let table = self.reactor.species();
        let node_duals = |i: usize| -> [Dual<6>; 6] {
            std::array::from_fn(|k| Dual::var(y.as_slice()[STRIDE * i + k], k))
        };
        let (rhou0, _) = node_fluxes(table, cfg.p_ref, &node_duals(0));
        for k in 0..6 {
            jac.add(state::P, k, -rhou0.eps[k]);
        }
        let last = self.last_node();
        let (rhou, flux) = node_fluxes(table, cfg.p_ref, &node_duals(last));
        let b = STRIDE * last;
        for k in 0..6 {
            jac.add(b + state::P, b + k, rhou.eps[k]);
            for s in 0..3 {
                jac.add(b + state::Y + s, b + k, flux[s].eps[k]);
            }
        }
        for row in Self::dirichlet_rows() {
            jac.clear_row(row);
            jac.set(row, row, 1.0);
        }
        jac
    }

    pub fn scaled_jacobian(&self, y: &StateVector) -> BandMatrix {
        let mut j = self.jacobian(y);
        for (i, s) in self.row_scale.iter().enumerate() {
            j.scale_row(i, *s);
        }
        j
    }

    /// λᵀ ∂R/∂(controls) at state `y` for an (unscaled) multiplier `lambda`.
    pub fn control_vjp(&self, y: &StateVector, lambda: &[f64]) -> ControlVjp {
        let mesh = self.reactor.mesh();
        let mut lam = lambda.to_vec();
        for row in Self::dirichlet_rows() {
            lam[row] = 0.0;
        }
        let mut kin_grad = [0.0; 3];
        let mut wall = vec![0.0; self.op.wall.values.len()];
        let k = &self.op.kinetics;
        let kin = Kinetics {
            activation_energy: Dual::<6>::var(k.activation_energy, 3),
            log_pre_exponential: Dual::var(k.log_pre_exponential, 4),
            exponent: Dual::var(k.exponent, 5),
        };
        for e in 0..mesh.n_elements() {
            let l = y.local(e).map(Dual::<6>::constant);
            let tw: [Dual<6>; 3] = std::array::from_fn(|q| Dual::var(self.wall_q[e][q], q));
            let (re, _) = element_residual(&self.ctx(e), &l, &tw, &kin);
            let base = STRIDE * e;
            let mut acc = [0.0; 6];
            for (i, ri) in re.iter().enumerate() {
                let li = lam[base + i];
                if li != 0.0 {
                    for (a, d) in acc.iter_mut().zip(ri.eps.iter()) {
                        *a += li * d;
                    }
                }
            }
            for (g, a) in kin_grad.iter_mut().zip(&acc[3..]) {
                *g += a;
            }
            let xq = mesh.quad_points(e);
            for q in 0..3 {
                for (idx, w) in self.op.wall.stencil(mesh, xq[q]) {
                    if w != 0.0 {
                        wall[idx] += w * acc[q];
                    }
                }
            }
        }
        ControlVjp {
            kinetics: kin_grad,
            wall,
            u_in: -lambda[state::U],
            t_in: -lambda[state::T],
        }
    }
}
