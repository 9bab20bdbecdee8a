use std::sync::Arc;

use rayon::prelude::*;
use sabatier_core::kinetics::{equilibrium_conversion, equilibrium_mole_fractions, KineticParams};
use sabatier_core::problems::experiments::{standard_grid, synthetic_dataset};
use sabatier_core::problems::{run_flow_maximization, run_identification, run_tracking, Dataset};
use sabatier_core::reactor::{OperatingPoint, ProfileRow, Reactor, Summary, WallTemperature};
use sabatier_core::species::SpeciesTable;
use sabatier_core::thermo::KELVIN_OFFSET;
use serde::Serialize;
use serde_json::json;

use crate::config::{Problem, RunConfig};
use crate::error::CliError;
use crate::output::{fmt12, OutDir};

/// Conservation checks a converged state must pass.
const BALANCE_LIMIT: f64 = 1e-6;

fn species(cfg: &RunConfig) -> Result<Arc<SpeciesTable>, CliError> {
    match &cfg.paths.species {
        Some(path) => SpeciesTable::load(path)
            .map(Arc::new)
            .map_err(|e| CliError::Config(e.to_string())),
        None => Ok(Arc::new(SpeciesTable::builtin().clone())),
    }
}

fn reactor(cfg: &RunConfig) -> Result<Reactor, CliError> {
    Reactor::with_species(cfg.reactor.clone(), species(cfg)?)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn check_balance(s: &Summary) -> Result<(), CliError> {
    let b = &s.balance;
    if b.mass_flux_spread > BALANCE_LIMIT || b.atom_balance > BALANCE_LIMIT {
        return Err(CliError::Validation(format!(
            "conservation check exceeded {BALANCE_LIMIT:e}: mass flux spread {:e}, atom balance {:e}",
            b.mass_flux_spread, b.atom_balance
        )));
    }
    Ok(())
}

const PROFILE_HEADER: [&str; 9] = [
    "x",
    "p",
    "u",
    "T",
    "Y_CO2",
    "Y_H2",
    "Y_CH4",
    "Y_H2O",
    "conversion",
];

fn profile_rows(rows: Vec<ProfileRow>) -> impl Iterator<Item = Vec<f64>> {
    rows.into_iter().map(|r| {
        vec![
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
}

fn wall_rows(reactor: &Reactor, wall: &WallTemperature) -> Vec<Vec<f64>> {
    let mesh = reactor.mesh();
    mesh.nodes()
        .into_iter()
        .zip(wall.nodal(mesh))
        .map(|(x, t)| vec![x, t, t - KELVIN_OFFSET])
        .collect()
}

pub fn equilibrium(cfg: &RunConfig) -> Result<(), CliError> {
    let table = species(cfg)?;
    let e = &cfg.equilibrium;
    let step = (e.t_max_c - e.t_min_c) / (e.points - 1) as f64;
    let grid: Vec<(f64, f64)> = e
        .pressures_bar
        .iter()
        .flat_map(|&p| (0..e.points).map(move |i| (p, e.t_min_c + step * i as f64)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(p_bar, t_c)| {
            let chi = equilibrium_conversion(&table, t_c + KELVIN_OFFSET, p_bar * 1e5)
                .map_err(|err| CliError::Nonconvergence(err.to_string()))?;
            let x = equilibrium_mole_fractions(chi);
            Ok(vec![
                t_c,
                t_c + KELVIN_OFFSET,
                p_bar,
                chi,
                x[0],
                x[1],
                x[2],
                x[3],
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let out = OutDir::create(&cfg.paths.out)?;
    let path = out.csv(
        "equilibrium.csv",
        &[
            "T_C",
            "T_K",
            "p_bar",
            "conversion",
            "x_CO2",
            "x_H2",
            "x_CH4",
            "x_H2O",
        ],
        rows.iter().cloned(),
    )?;
    println!("equilibrium CO2 conversion of a 1:4 CO2/H2 feed");
    println!(
        "{:>8} {}",
        "T [°C]",
        e.pressures_bar
            .iter()
            .map(|p| format!("{:>12}", format!("{p} bar")))
            .collect::<String>()
    );
    let stride = (e.points / 10).max(1);
    for i in (0..e.points).step_by(stride) {
        let cols: String = (0..e.pressures_bar.len())
            .map(|j| format!("{:>12.6}", rows[j * e.points + i][3]))
            .collect();
        println!("{:>8.1} {cols}", rows[i][0]);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn operating_point(cfg: &RunConfig) -> Result<OperatingPoint, CliError> {
    Ok(OperatingPoint::new(
        cfg.scenario.flow_rate,
        cfg.wall()?,
        cfg.kinetics.params()?,
    ))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let reactor = reactor(cfg)?;
    let op = operating_point(cfg)?;
    let sol = reactor.solve(&op, None, &cfg.solver)?;
    let summary = reactor.summary(&sol, &op);
    let out = OutDir::create(&cfg.paths.out)?;
    let profile = out.csv(
        "profile.csv",
        &PROFILE_HEADER,
        profile_rows(reactor.profile(&sol.state)),
    )?;
    let path = out.json(
        "summary.json",
        &json!({
            "operating_point": op,
            "summary": summary,
        }),
    )?;
    println!(
        "flow {} mL/min, {} wall, Newton converged in {} iterations (residual {:.2e})",
        fmt12(op.flow_mln_min),
        op.wall.layout,
        summary.newton_iterations,
        summary.final_residual
    );
    println!("CO2 conversion      {}", fmt12(summary.conversion));
    println!("CH4 + H2O yield     {} mol/s", fmt12(summary.product_yield));
    println!(
        "outlet mass flux    {} kg/(m² s)",
        fmt12(summary.outlet_mass_flux)
    );
    println!(
        "max |T - T_wall|    {} K",
        fmt12(summary.balance.max_wall_deviation)
    );
    println!(
        "mass flux spread    {:.3e}",
        summary.balance.mass_flux_spread
    );
    println!("atom balance        {:.3e}", summary.balance.atom_balance);
    println!("wrote {} and {}", profile.display(), path.display());
    check_balance(&summary)
}

#[derive(Serialize)]
struct FitParams {
    activation_energy: f64,
    activation_energy_kj_mol: f64,
    log_pre_exponential: f64,
    pre_exponential: f64,
    exponent: f64,
}

impl From<KineticParams> for FitParams {
    fn from(p: KineticParams) -> Self {
        FitParams {
            activation_energy: p.activation_energy,
            activation_energy_kj_mol: p.activation_energy / 1e3,
            log_pre_exponential: p.log_pre_exponential,
            pre_exponential: p.log_pre_exponential.exp(),
            exponent: p.exponent,
        }
    }
}

pub fn fit(cfg: &RunConfig) -> Result<(), CliError> {
    let reactor = reactor(cfg)?;
    let data = Dataset::load(&cfg.paths.experiments)?;
    let res = run_identification(
        &reactor,
        &data,
        &cfg.fit.start()?,
        &cfg.optimizer,
        &cfg.solver,
    )?;
    let out = OutDir::create(&cfg.paths.out)?;
    let csv = out.csv(
        "fit.csv",
        &[
            "id",
            "T_wall_C",
            "flow_mln_min",
            "measured",
            "simulated",
            "error",
        ],
        res.fits.iter().map(|f| {
            vec![
                f.id as f64,
                f.t_wall_c,
                f.flow_mln_min,
                f.measured,
                f.simulated,
                f.error,
            ]
        }),
    )?;
    let path = out.json(
        "fit.json",
        &json!({
            "params": FitParams::from(res.params),
            "mean_abs_error": res.mean_abs_error,
            "max_abs_error": res.max_abs_error,
            "iterations": res.report.iterations,
            "total_solves": res.total_solves,
            "report": res.report,
        }),
    )?;
    let p = res.params;
    println!(
        "identification stopped ({:?}) after {} iterations with a total of {} solves",
        res.report.status, res.report.iterations, res.total_solves
    );
    println!("E_a   {} kJ/mol", fmt12(p.activation_energy / 1e3));
    println!("ln A  {}", fmt12(p.log_pre_exponential));
    println!("n     {}", fmt12(p.exponent));
    println!(
        "conversion error: mean {}, max {}",
        fmt12(res.mean_abs_error),
        fmt12(res.max_abs_error)
    );
    println!("wrote {} and {}", path.display(), csv.display());
    if !res.report.converged() {
        return Err(CliError::Nonconvergence(format!(
            "identification did not reach the stationarity tolerance ({:?})",
            res.report.status
        )));
    }
    Ok(())
}

pub fn optimize(cfg: &RunConfig) -> Result<(), CliError> {
    let reactor = reactor(cfg)?;
    let s = &cfg.scenario;
    let kin = cfg.kinetics.params()?;
    let out = OutDir::create(&cfg.paths.out)?;
    let (wall, flow, report, summary) = match s.problem {
        Problem::Identification => return fit(cfg),
        Problem::Tracking => {
            let res = run_tracking(
                &reactor,
                s.flow_rate,
                s.temperature_model,
                kin,
                s.start_temperature,
                &cfg.optimizer,
                &cfg.solver,
            )?;
            out.json("optimize.json", &res)?;
            println!(
                "tracking, {} wall, {} mL/min: conversion {}, yield {} mol/s",
                s.temperature_model,
                fmt12(res.flow_mln_min),
                fmt12(res.conversion),
                fmt12(res.product_yield)
            );
            (res.wall, res.flow_mln_min, res.report, res.summary)
        }
        Problem::Flow => {
            let res = run_flow_maximization(
                &reactor,
                s.chi_des,
                s.temperature_model,
                kin,
                &cfg.flow_options(),
                &cfg.solver,
            )?;
            out.json("optimize.json", &res)?;
            println!(
                "flow maximization, {} wall, conversion ≥ {}: flow {} mL/min, conversion {}, yield {} mol/s",
                s.temperature_model,
                fmt12(s.chi_des),
                fmt12(res.flow_mln_min),
                fmt12(res.conversion),
                fmt12(res.product_yield)
            );
            (res.wall, res.flow_mln_min, res.report, res.summary)
        }
    };
    if wall.values.len() <= 3 {
        let t: Vec<String> = wall.values.iter().map(|v| fmt12(*v)).collect();
        println!("wall temperature [K]: {}", t.join(", "));
    }
    out.csv(
        "wall.csv",
        &["x", "T_wall_K", "T_wall_C"],
        wall_rows(&reactor, &wall),
    )?;
    let op = OperatingPoint::new(flow, wall, kin);
    let sol = reactor.solve(&op, None, &cfg.solver)?;
    out.csv(
        "profile.csv",
        &PROFILE_HEADER,
        profile_rows(reactor.profile(&sol.state)),
    )?;
    println!(
        "{:?} after {} iterations, {} state and {} adjoint solves; wrote {}",
        report.status,
        report.iterations,
        report.state_solves,
        report.adjoint_solves,
        out.path("optimize.json").display()
    );
    check_balance(&summary)?;
    if !report.converged() {
        return Err(CliError::Nonconvergence(format!(
            "optimizer did not reach the stationarity tolerance ({:?})",
            report.status
        )));
    }
    Ok(())
}

pub fn generate_data(cfg: &RunConfig) -> Result<(), CliError> {
    let reactor = reactor(cfg)?;
    let data = synthetic_dataset(
        &reactor,
        cfg.kinetics.params()?,
        &standard_grid(),
        cfg.scenario.noise,
        cfg.seed,
        &cfg.solver,
    )?;
    let out = OutDir::create(&cfg.paths.out)?;
    let path = out.path("experiments.csv");
    data.save(&path).map_err(|e| CliError::Write {
        path: path.clone(),
        source: std::io::Error::other(e),
    })?;
    println!(
        "{} synthetic experiments (noise {}, seed {}) written to {}",
        data.len(),
        fmt12(cfg.scenario.noise),
        cfg.seed,
        path.display()
    );
    Ok(())
}
