use proptest::prelude::*;
use sabatier_core::kinetics::{equilibrium_conversion, KineticParams};
use sabatier_core::reactor::{
    NewtonOptions, OperatingPoint, Reactor, ReactorConfig, SolveError, WallLayout, WallTemperature,
};

fn reactor(n_nodes: usize) -> Reactor {
    Reactor::new(ReactorConfig {
        n_nodes,
        ..ReactorConfig::default()
    })
    .unwrap()
}

fn conversion(r: &Reactor, flow: f64, t_c: f64) -> f64 {
    let op = OperatingPoint::isothermal(flow, t_c, KineticParams::reference());
    let sol = r.solve(&op, None, &NewtonOptions::default()).unwrap();
    r.conversion(&sol.state)
}

#[test]
fn outlet_conversion_stays_below_equilibrium() {
    let r = reactor(1001);
    for (flow, t_c) in [(50.0, 400.0), (50.0, 350.0), (150.0, 250.0)] {
        let chi = conversion(&r, flow, t_c);
        let eq = equilibrium_conversion(r.species(), t_c + 273.15, r.config().p_ref).unwrap();
        assert!(chi > 0.0 && chi < eq, "{t_c} C {flow}: chi {chi} eq {eq}");
    }
}

#[test]
fn conversion_profile_is_monotone_along_the_channel() {
    let r = reactor(1001);
    let op = OperatingPoint::isothermal(100.0, 325.0, KineticParams::reference());
    let sol = r.solve(&op, None, &NewtonOptions::default()).unwrap();
    let rows = r.profile(&sol.state);
    assert_eq!(rows.len(), 1001);
    for w in rows.windows(2) {
        assert!(w[1].conversion >= w[0].conversion - 1e-12);
    }
    assert!((rows.last().unwrap().conversion - r.conversion(&sol.state)).abs() < 1e-15);
    // pressure falls along the packed channel
    assert!(rows[0].p > rows.last().unwrap().p);
}

#[test]
fn mesh_refinement_converges() {
    // 11k elements put a node on the catalyst entrance x = 0
    let fine = conversion(&reactor(881), 100.0, 325.0);
    for n in [111, 221, 441] {
        let chi = conversion(&reactor(n), 100.0, 325.0);
        assert!((chi - fine).abs() < 1e-7, "{n} nodes: {chi} vs {fine}");
    }
    // a cut element at x = 0 costs accuracy but stays close
    assert!((conversion(&reactor(1001), 100.0, 325.0) - fine).abs() < 1e-4);
}

#[test]
fn staged_wall_with_equal_values_matches_constant() {
    let r = reactor(201);
    let kin = KineticParams::reference();
    let newton = NewtonOptions::default();
    let base = r
        .solve(
            &OperatingPoint::new(100.0, WallTemperature::constant(600.0), kin),
            None,
            &newton,
        )
        .unwrap();
    for layout in [
        WallLayout::TwoStage,
        WallLayout::ThreeStage,
        WallLayout::Distributed,
    ] {
        let op = OperatingPoint::new(100.0, WallTemperature::uniform(layout, 201, 600.0), kin);
        let sol = r.solve(&op, None, &newton).unwrap();
        assert!(
            (r.conversion(&sol.state) - r.conversion(&base.state)).abs() < 1e-10,
            "{layout}"
        );
    }
}

#[test]
fn invalid_operating_points_are_rejected() {
    let r = reactor(101);
    let kin = KineticParams::reference();
    let bad_flow = OperatingPoint::isothermal(-1.0, 300.0, kin);
    assert!(matches!(
        r.solve(&bad_flow, None, &NewtonOptions::default()),
        Err(SolveError::Config(_))
    ));
    let wrong_dim = OperatingPoint::new(
        100.0,
        WallTemperature::new(WallLayout::ThreeStage, vec![600.0]),
        kin,
    );
    assert!(r
        .solve(&wrong_dim, None, &NewtonOptions::default())
        .is_err());
    let short = reactor(51).cold_start(&OperatingPoint::isothermal(50.0, 300.0, kin));
    assert!(matches!(
        r.solve(
            &OperatingPoint::isothermal(50.0, 300.0, kin),
            Some(&short),
            &NewtonOptions::default()
        ),
        Err(SolveError::StateSize { .. })
    ));
}

#[test]
fn hot_staged_cold_start_recovers_by_continuation() {
    let r = reactor(221);
    let wall = WallTemperature::new(WallLayout::TwoStage, vec![743.68, 624.63]);
    let op = OperatingPoint::new(100.0, wall, KineticParams::reference());
    let opts = NewtonOptions::default();
    let sol = r.solve(&op, None, &opts).unwrap();
    assert!(sol.report.continuation_stages > 0);
    let again = r.solve(&op, Some(&sol.state), &opts).unwrap();
    assert!(again.report.iterations <= 1);
    let chi = r.conversion(&sol.state);
    assert!((chi - r.conversion(&again.state)).abs() < 1e-10);
    assert!(chi > 0.9 && chi < 1.0, "{chi}");

    let mild = OperatingPoint::isothermal(100.0, 350.0, KineticParams::reference());
    assert_eq!(
        r.solve(&mild, None, &opts)
            .unwrap()
            .report
            .continuation_stages,
        0
    );
}

#[test]
fn iteration_cap_reports_nonconvergence() {
    let r = reactor(101);
    let op = OperatingPoint::isothermal(100.0, 325.0, KineticParams::reference());
    let opts = NewtonOptions {
        max_iter: 2,
        ..NewtonOptions::default()
    };
    match r.solve(&op, None, &opts) {
        Err(SolveError::NonConvergence {
            iterations,
            residual,
        }) => {
            assert_eq!(iterations, 2);
            assert!(residual > 1e-10);
        }
        other => panic!("expected nonconvergence, got {other:?}"),
    }
}

#[test]
fn summary_serializes_with_balance_report() {
    let r = reactor(101);
    let op = OperatingPoint::isothermal(50.0, 300.0, KineticParams::reference());
    let sol = r.solve(&op, None, &NewtonOptions::default()).unwrap();
    let v = serde_json::to_value(r.summary(&sol, &op)).unwrap();
    for key in [
        "conversion",
        "product_yield",
        "outlet_mass_flux",
        "balance",
        "newton_iterations",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v["balance"]["mass_flux_spread"].as_f64().unwrap() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn conversion_falls_with_flow_and_rises_with_temperature_below_equilibrium(
        flow in 40.0f64..200.0,
        t_c in 240.0f64..300.0,
    ) {
        let r = reactor(201);
        let base = conversion(&r, flow, t_c);
        prop_assert!(conversion(&r, flow * 1.2, t_c) < base);
        prop_assert!(conversion(&r, flow, t_c + 10.0) > base);
    }

    #[test]
    fn conservation_holds_at_random_operating_points(
        flow in 30.0f64..400.0,
        t_c in 200.0f64..450.0,
    ) {
        let r = reactor(1001);
        let op = OperatingPoint::isothermal(flow, t_c, KineticParams::reference());
        let sol = r.solve(&op, None, &NewtonOptions::default()).unwrap();
        let b = r.balances(&sol.state, &op);
        prop_assert!(b.mass_flux_spread < 1e-8);
        prop_assert!(b.atom_balance < 1e-6);
        prop_assert!(b.closure_error < 1e-15);
        prop_assert!(b.min_mass_fraction > -1e-12);
    }
}
