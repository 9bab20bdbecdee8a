//! Steady 1D reactor model on Ω = (−L/10, L).
//!
//! Unknowns are pressure (P1), velocity (P2), temperature (P1) and three
//! mass fractions (P1). The inlet section (−L/10, 0) carries no reaction.

mod adjoint;
mod assembly;
pub mod mesh;
mod newton;
mod output;
pub mod state;
pub mod wall;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::KineticParams;
use crate::species::{SpeciesTable, N_SPECIES};
use crate::thermo::{Composition, CompositionError, GAS_CONSTANT, P_ATM, T_NORMAL};

/// Wall temperature (K) where a failed cold start restarts its continuation.
const CONTINUATION_T_START: f64 = 523.15;
const CONTINUATION_MIN_STEP: f64 = 1.0 / 64.0;

pub use adjoint::ControlGradient;
pub use assembly::{ControlVjp, System};
pub use mesh::Mesh1D;
pub use newton::{NewtonOptions, NewtonReport, Solution};
pub use output::{BalanceReport, ProfileRow, Summary};
pub use state::StateVector;
pub use wall::{WallLayout, WallTemperature};

/// Rows of the equation blocks, used in diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Block {
    Continuity,
    Momentum,
    Temperature,
    Species,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Block::Continuity => "continuity",
            Block::Momentum => "momentum",
            Block::Temperature => "temperature",
            Block::Species => "species",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("reactor parameter {name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("mesh needs at least 3 nodes, got {0}")]
    Mesh(usize),
    #[error("inlet composition: {0}")]
    Inlet(#[from] CompositionError),
    #[error("inlet mole fractions must sum to 1, got {0}")]
    MoleFractionSum(f64),
    #[error("wall temperature model {layout} expects {expected} values, got {got}")]
    WallDim {
        layout: WallLayout,
        expected: usize,
        got: usize,
    },
    #[error("wall temperature {0} K is not positive and finite")]
    WallValue(f64),
    #[error("flow rate must be positive, got {0} mL/min")]
    Flow(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(
        "Newton solver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("non-finite {block} residual at node {node}")]
    NonFinite { block: Block, node: usize },
    #[error("singular Jacobian at row {0}")]
    Singular(usize),
    #[error("invalid operating point: {0}")]
    Config(#[from] ConfigError),
    #[error("state has {got} nodes, reactor mesh has {expected}")]
    StateSize { expected: usize, got: usize },
}

/// Geometry, porous-medium data and feed of one microchannel reactor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactorConfig {
    /// Length of the reaction zone, m.
    pub length: f64,
    /// Channel width, m.
    pub width: f64,
    /// Channel height, m.
    pub height: f64,
    pub n_channels: u32,
    /// Brinkman permeability, m².
    pub permeability: f64,
    /// Volumetric wall heat transfer coefficient, W/(K·m³).
    pub heat_transfer: f64,
    /// Operating pressure, Pa.
    pub p_ref: f64,
    /// Inlet mole fractions of CO2, H2, CH4, H2O.
    pub inlet_mole_fractions: [f64; N_SPECIES],
    pub n_nodes: usize,
    /// Length of the inert inlet section as a fraction of `length`.
    pub inlet_section: f64,
    /// Reference state of volumetric flow rates.
    pub normal_pressure: f64,
    pub normal_temperature: f64,
}

impl Default for ReactorConfig {
    fn default() -> Self {
        ReactorConfig {
            length: 5e-2,
            width: 4.5e-4,
            height: 1.5e-4,
            n_channels: 80,
            permeability: 1.48e-9,
            heat_transfer: 6.77e8,
            p_ref: 1e6,
            inlet_mole_fractions: [0.2, 0.8, 0.0, 0.0],
            n_nodes: 1001,
            inlet_section: 0.1,
            normal_pressure: P_ATM,
            normal_temperature: T_NORMAL,
        }
    }
}

impl ReactorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("n_channels", self.n_channels as f64),
            ("permeability", self.permeability),
            ("heat_transfer", self.heat_transfer),
            ("p_ref", self.p_ref),
            ("inlet_section", self.inlet_section),
            ("normal_pressure", self.normal_pressure),
            ("normal_temperature", self.normal_temperature),
        ];
        for (name, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if self.n_nodes < 3 {
            return Err(ConfigError::Mesh(self.n_nodes));
        }
        let s: f64 = self.inlet_mole_fractions.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(ConfigError::MoleFractionSum(s));
        }
        Ok(())
    }
}

/// Controls and kinetics defining one steady solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Reactor-wide feed in mL/min at normal conditions.
    pub flow_mln_min: f64,
    pub wall: WallTemperature,
    pub kinetics: KineticParams,
}

impl OperatingPoint {
    pub fn new(flow_mln_min: f64, wall: WallTemperature, kinetics: KineticParams) -> Self {
        OperatingPoint {
            flow_mln_min,
            wall,
            kinetics,
        }
    }

    /// Isothermal wall at `t_wall_c` °C.
    pub fn isothermal(flow_mln_min: f64, t_wall_c: f64, kinetics: KineticParams) -> Self {
        OperatingPoint::new(
            flow_mln_min,
            WallTemperature::constant(t_wall_c + crate::thermo::KELVIN_OFFSET),
            kinetics,
        )
    }
}

#[derive(Clone, Debug)]
pub struct Reactor {
    config: ReactorConfig,
    mesh: Mesh1D,
    species: Arc<SpeciesTable>,
    inlet: Composition,
}

impl Reactor {
    pub fn new(config: ReactorConfig) -> Result<Self, ConfigError> {
        Reactor::with_species(config, Arc::new(SpeciesTable::builtin().clone()))
    }

    pub fn with_species(
        config: ReactorConfig,
        species: Arc<SpeciesTable>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let inlet = Composition::from_mole_fractions(&species, config.inlet_mole_fractions)?;
        let mesh = Mesh1D::uniform(
            -config.inlet_section * config.length,
            config.length,
            config.n_nodes,
        );
        Ok(Reactor {
            config,
            mesh,
            species,
            inlet,
        })
    }

    pub fn config(&self) -> &ReactorConfig {
        &self.config
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn species(&self) -> &SpeciesTable {
        &self.species
    }

    pub fn species_arc(&self) -> Arc<SpeciesTable> {
        Arc::clone(&self.species)
    }

    pub fn inlet_composition(&self) -> Composition {
        self.inlet
    }

    /// Reactor-wide molar feed in mol/s for a flow in mL/min at normal conditions.
    pub fn molar_inflow(&self, flow_mln_min: f64) -> f64 {
        let c = &self.config;
        flow_mln_min * 1e-6 / 60.0 * c.normal_pressure / (GAS_CONSTANT * c.normal_temperature)
    }

    /// Superficial inlet velocity in m/s of one channel.
    pub fn inlet_velocity(&self, flow_mln_min: f64, t_in: f64) -> f64 {
        let c = &self.config;
        let per_channel = self.molar_inflow(flow_mln_min) / c.n_channels as f64;
        per_channel * GAS_CONSTANT * t_in / c.p_ref / (c.width * c.height)
    }

    /// Inverse of [`Reactor::inlet_velocity`].
    pub fn flow_from_velocity(&self, u_in: f64, t_in: f64) -> f64 {
        u_in / self.inlet_velocity(1.0, t_in)
    }

    pub fn check_operating_point(&self, op: &OperatingPoint) -> Result<(), ConfigError> {
        if !(op.flow_mln_min > 0.0 && op.flow_mln_min.is_finite()) {
            return Err(ConfigError::Flow(op.flow_mln_min));
        }
        let expected = op.wall.layout.dim(self.mesh.n_nodes());
        if op.wall.values.len() != expected {
            return Err(ConfigError::WallDim {
                layout: op.wall.layout,
                expected,
                got: op.wall.values.len(),
            });
        }
        if let Some(&bad) = op
            .wall
            .values
            .iter()
            .find(|v| !(**v > 0.0 && v.is_finite()))
        {
            return Err(ConfigError::WallValue(bad));
        }
        Ok(())
    }

    pub fn system<'a>(&'a self, op: &'a OperatingPoint) -> Result<System<'a>, ConfigError> {
        self.check_operating_point(op)?;
        Ok(System::new(self, op))
    }

    /// Zero velocity and pressure, inlet temperature and composition everywhere.
    pub fn cold_start(&self, op: &OperatingPoint) -> StateVector {
        let n = self.mesh.n_nodes();
        let mut s = StateVector::zeros(n);
        let t_in = op.wall.inlet();
        let y_in = self.inlet.independent();
        for i in 0..n {
            s.set_t(i, t_in);
            for (k, &v) in y_in.iter().enumerate() {
                s.set_y(i, k, v);
            }
        }
        s.set_u(0, self.inlet_velocity(op.flow_mln_min, t_in));
        s
    }

    /// Solves the steady state, warm-starting from `guess` when given.
    pub fn solve(
        &self,
        op: &OperatingPoint,
        guess: Option<&StateVector>,
        opts: &NewtonOptions,
    ) -> Result<Solution, SolveError> {
        let sys = self.system(op)?;
        let y0 = match guess {
            Some(g) => {
                if g.n_nodes() != self.mesh.n_nodes() {
                    return Err(SolveError::StateSize {
                        expected: self.mesh.n_nodes(),
                        got: g.n_nodes(),
                    });
                }
                g.clone()
            }
            None => {
                return match sys.newton(self.cold_start(op), opts) {
                    Err(
                        e @ (SolveError::NonConvergence { .. }
                        | SolveError::NonFinite { .. }
                        | SolveError::Singular(_)),
                    ) => self.continuation(op, opts).map_err(|_| e),
                    other => other,
                };
            }
        };
        sys.newton(y0, opts)
    }

    /// Raises the wall temperature from a mild uniform value to `op.wall`,
    /// warm-starting each stage from the previous one.
    fn continuation(
        &self,
        op: &OperatingPoint,
        opts: &NewtonOptions,
    ) -> Result<Solution, SolveError> {
        let t_mild = op
            .wall
            .values
            .iter()
            .copied()
            .fold(CONTINUATION_T_START, f64::min);
        let blend = |s: f64| {
            let mut o = op.clone();
            for v in o.wall.values.iter_mut() {
                *v = t_mild + s * (*v - t_mild);
            }
            o
        };
        let start = blend(0.0);
        let mut sol = self.system(&start)?.newton(self.cold_start(&start), opts)?;
        let mut iterations = sol.report.iterations;
        let mut stages = 1;
        let (mut s, mut ds) = (0.0_f64, 0.25);
        while s < 1.0 {
            let next = (s + ds).min(1.0);
            let stage = blend(next);
            match self.system(&stage)?.newton(sol.state.clone(), opts) {
                Ok(new) => {
                    iterations += new.report.iterations;
                    stages += 1;
                    sol = new;
                    s = next;
                    ds *= 2.0;
                }
                Err(
                    SolveError::NonConvergence { .. }
                    | SolveError::NonFinite { .. }
                    | SolveError::Singular(_),
                ) if ds > CONTINUATION_MIN_STEP => {
                    ds *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        sol.report.iterations = iterations;
        sol.report.continuation_stages = stages;
        Ok(sol)
    }
}
