//! Solves the reactor at one isothermal operating point and prints the
//! outlet conversion, the product yield and the conservation checks.
//!
//! cargo run --release -p sabatier-core --example operating_point -- 325 100

use sabatier_core::kinetics::KineticParams;
use sabatier_core::reactor::{NewtonOptions, OperatingPoint, Reactor, ReactorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let t_wall_c = args.next().transpose()?.unwrap_or(325.0);
    let flow = args.next().transpose()?.unwrap_or(100.0);

    let reactor = Reactor::new(ReactorConfig::default())?;
    let op = OperatingPoint::isothermal(flow, t_wall_c, KineticParams::reference());
    let sol = reactor.solve(&op, None, &NewtonOptions::default())?;
    let s = reactor.summary(&sol, &op);

    println!("wall {t_wall_c} °C, feed {flow} mL/min");
    println!("  CO2 conversion   {:.6}", s.conversion);
    println!("  CH4 + H2O yield  {:.6e} mol/s", s.product_yield);
    println!("  Newton steps     {}", s.newton_iterations);
    println!("  mass flux spread {:.2e}", s.balance.mass_flux_spread);
    println!("  atom imbalance   {:.2e}", s.balance.atom_balance);
    println!("  max |T - T_wall| {:.3} K", s.balance.max_wall_deviation);
    Ok(())
}
