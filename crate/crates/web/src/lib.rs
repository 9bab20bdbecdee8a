//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Everything runs on a coarse mesh so a solve stays well below a second in
//! the browser. Temperatures cross the boundary in °C, feeds in mL/min.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use sabatier_core::kinetics::{equilibrium_conversion, KineticParams};
use sabatier_core::optim::LbfgsOptions;
use sabatier_core::problems::{run_tracking, WALL_T_START};
use sabatier_core::reactor::{
    NewtonOptions, OperatingPoint, Reactor, ReactorConfig, WallLayout, WallTemperature,
};
use sabatier_core::species::SpeciesTable;
use sabatier_core::thermo::KELVIN_OFFSET;
use wasm_bindgen::prelude::*;

/// Mesh nodes used by the demo.
pub const DEMO_NODES: usize = 221;

/// Columns of a packed profile row.
pub const PROFILE_COLUMNS: usize = 9;

fn reactor() -> Result<Reactor, String> {
    let config = ReactorConfig {
        n_nodes: DEMO_NODES,
        ..ReactorConfig::default()
    };
    Reactor::new(config).map_err(|e| e.to_string())
}

fn packed_profile(reactor: &Reactor, op: &OperatingPoint) -> Result<Vec<f64>, String> {
    let sol = reactor
        .solve(op, None, &NewtonOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(reactor
        .profile(&sol.state)
        .into_iter()
        .flat_map(|r| {
            [
                r.x,
                r.p,
                r.u,
                r.t,
                r.y_co2,
                r.y_h2,
                r.y_ch4,
                r.y_h2o,
                r.conversion,
            ]
        })
        .collect())
}

/// Equilibrium CO2 conversion at `points` temperatures between `t_min_c` and
/// `t_max_c` for a stoichiometric feed at `p_bar`.
pub fn equilibrium_curve(
    t_min_c: f64,
    t_max_c: f64,
    points: usize,
    p_bar: f64,
) -> Result<Vec<f64>, String> {
    if points < 2 || !(t_max_c > t_min_c) || !(p_bar > 0.0) {
        return Err("need points ≥ 2, t_max > t_min and p > 0".into());
    }
    let table = SpeciesTable::builtin();
    let step = (t_max_c - t_min_c) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let t = t_min_c + step * i as f64 + KELVIN_OFFSET;
            equilibrium_conversion(table, t, p_bar * 1e5).map_err(|e| e.to_string())
        })
        .collect()
}

/// Steady state at a uniform wall temperature, packed row-major as
/// `x, p, u, T, Y_CO2, Y_H2, Y_CH4, Y_H2O, conversion` per node.
pub fn simulate(flow_mln_min: f64, t_wall_c: f64) -> Result<Vec<f64>, String> {
    let reactor = reactor()?;
    let op = OperatingPoint::new(
        flow_mln_min,
        WallTemperature::uniform(WallLayout::Constant, DEMO_NODES, t_wall_c + KELVIN_OFFSET),
        KineticParams::reference(),
    );
    packed_profile(&reactor, &op)
}

/// Wall temperatures maximizing the product yield at a fixed feed.
#[wasm_bindgen]
pub struct WallOptimum {
    conversion: f64,
    iterations: usize,
    wall_c: Vec<f64>,
    wall_nodal_c: Vec<f64>,
    profile: Vec<f64>,
}

#[wasm_bindgen]
impl WallOptimum {
    #[wasm_bindgen(getter)]
    pub fn conversion(&self) -> f64 {
        self.conversion
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Control values, one per stage (°C).
    #[wasm_bindgen(getter, js_name = wallC)]
    pub fn wall_c(&self) -> Vec<f64> {
        self.wall_c.clone()
    }

    /// Wall temperature at every mesh node (°C).
    #[wasm_bindgen(getter, js_name = wallNodalC)]
    pub fn wall_nodal_c(&self) -> Vec<f64> {
        self.wall_nodal_c.clone()
    }

    /// Packed profile at the optimum, laid out as in [`simulate`].
    #[wasm_bindgen(getter)]
    pub fn profile(&self) -> Vec<f64> {
        self.profile.clone()
    }
}

/// `layout` is one of `constant`, `two_stage`, `three_stage`, `distributed`.
pub fn optimize_wall(flow_mln_min: f64, layout: &str) -> Result<WallOptimum, String> {
    let layout: WallLayout = layout.parse().map_err(|e: String| e)?;
    let reactor = reactor()?;
    let kin = KineticParams::reference();
    let newton = NewtonOptions::default();
    let opts = LbfgsOptions {
        tol_rel: 1e-4,
        ..LbfgsOptions::default()
    };
    let res = run_tracking(
        &reactor,
        flow_mln_min,
        layout,
        kin,
        WALL_T_START,
        &opts,
        &newton,
    )
    .map_err(|e| e.to_string())?;
    let celsius = |v: Vec<f64>| v.into_iter().map(|t| t - KELVIN_OFFSET).collect::<Vec<_>>();
    let wall_nodal_c = celsius(res.wall.nodal(reactor.mesh()));
    let op = OperatingPoint::new(flow_mln_min, res.wall.clone(), kin);
    Ok(WallOptimum {
        conversion: res.conversion,
        iterations: res.report.iterations,
        wall_c: celsius(res.wall.values),
        wall_nodal_c,
        profile: packed_profile(&reactor, &op)?,
    })
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = equilibriumCurve)]
pub fn js_equilibrium_curve(
    t_min_c: f64,
    t_max_c: f64,
    points: usize,
    p_bar: f64,
) -> Result<Vec<f64>, JsError> {
    equilibrium_curve(t_min_c, t_max_c, points, p_bar).map_err(js)
}

#[wasm_bindgen(js_name = simulate)]
pub fn js_simulate(flow_mln_min: f64, t_wall_c: f64) -> Result<Vec<f64>, JsError> {
    simulate(flow_mln_min, t_wall_c).map_err(js)
}

#[wasm_bindgen(js_name = optimizeWall)]
pub fn js_optimize_wall(flow_mln_min: f64, layout: &str) -> Result<WallOptimum, JsError> {
    optimize_wall(flow_mln_min, layout).map_err(js)
}

#[wasm_bindgen(js_name = demoNodes)]
pub fn js_demo_nodes() -> usize {
    DEMO_NODES
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_curve_falls_with_temperature() {
        let chi = equilibrium_curve(200.0, 600.0, 9, 1.0).unwrap();
        assert_eq!(chi.len(), 9);
        assert!(chi.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn simulate_packs_one_row_per_node() {
        let p = simulate(50.0, 350.0).unwrap();
        assert_eq!(p.len(), DEMO_NODES * PROFILE_COLUMNS);
        let chi = p[p.len() - 1];
        assert!(chi > 0.9 && chi < 1.0, "{chi}");
    }

    #[test]
    fn two_stage_optimum_beats_the_start() {
        let start = simulate(100.0, WALL_T_START - KELVIN_OFFSET).unwrap();
        let opt = optimize_wall(100.0, "two_stage").unwrap();
        assert_eq!(opt.wall_c().len(), 2);
        assert_eq!(opt.wall_nodal_c().len(), DEMO_NODES);
        assert!(opt.conversion() > start[start.len() - 1]);
    }
}
