use super::*;
use crate::reactor::SolveError;
use proptest::prelude::*;

/// f(x) = ½ (x − c)ᵀ A (x − c) with a fixed SPD A.
struct Quadratic {
    a: [[f64; 3]; 3],
    c: [f64; 3],
    evals: usize,
}

impl Quadratic {
    fn new(c: [f64; 3]) -> Self {
        Quadratic {
            a: [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]],
            c,
            evals: 0,
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        3
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        self.evals += 1;
        let d: Vec<f64> = (0..3).map(|i| x[i] - self.c[i]).collect();
        let g: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| self.a[i][j] * d[j]).sum())
            .collect();
        let f = 0.5 * (0..3).map(|i| d[i] * g[i]).sum::<f64>();
        Ok((f, g))
    }

    fn counts(&self) -> SolveCounts {
        SolveCounts {
            state_solves: self.evals,
            adjoint_solves: self.evals,
        }
    }
}

#[test]
fn unconstrained_quadratic_reaches_minimizer() {
    let mut q = Quadratic::new([1.0, -2.0, 0.5]);
    let opts = LbfgsOptions {
        tol_rel: 1e-12,
        ..LbfgsOptions::default()
    };
    let r = projected_lbfgs(&mut q, &[0.0; 3], &BoxConstraint::unbounded(3), &opts).unwrap();
    assert!(r.converged());
    assert!(r.iterations <= 10, "{}", r.iterations);
    for (x, c) in r.final_controls.iter().zip([1.0, -2.0, 0.5]) {
        assert!((x - c).abs() < 1e-10);
    }
    for w in r.cost_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn minimizer_outside_box_converges_to_kkt_point() {
    // A diagonal makes the constrained minimizer the projection of c.
    let mut q = Quadratic::new([3.0, -2.0, 0.5]);
    q.a = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 5.0]];
    let b = BoxConstraint::uniform(3, -1.0, 1.0).unwrap();
    let opts = LbfgsOptions {
        tol_rel: 1e-12,
        ..LbfgsOptions::default()
    };
    let r = projected_lbfgs(&mut q, &[0.0; 3], &b, &opts).unwrap();
    assert!(r.converged());
    let expect = [1.0, -1.0, 0.5];
    for (x, c) in r.final_controls.iter().zip(expect) {
        assert!((x - c).abs() < 1e-10, "{:?}", r.final_controls);
    }

    // With coupling the answer follows from the KKT system by hand:
    // x1 = 1 active (upper), x2, x3 free: solve A_FF (x_F − c_F) = −A_F1 (1 − c1).
    let mut q = Quadratic::new([3.0, 0.0, 0.0]);
    let b = BoxConstraint::new(vec![-5.0, -5.0, -5.0], vec![1.0, 5.0, 5.0]).unwrap();
    let r = projected_lbfgs(&mut q, &[0.0; 3], &b, &opts).unwrap();
    let (a22, a23, a33) = (3.0, 0.2, 2.0);
    let (r2, r3) = (-(1.0 - 3.0), -0.5 * (1.0 - 3.0));
    let det = a22 * a33 - a23 * a23;
    let x2 = (r2 * a33 - a23 * r3) / det;
    let x3 = (a22 * r3 - a23 * r2) / det;
    assert!((r.final_controls[0] - 1.0).abs() < 1e-12);
    assert!((r.final_controls[1] - x2).abs() < 1e-9);
    assert!((r.final_controls[2] - x3).abs() < 1e-9);
}

#[test]
fn stationary_start_takes_no_iterations() {
    let mut q = Quadratic::new([0.2, 0.3, 0.4]);
    let r = projected_lbfgs(
        &mut q,
        &[0.2, 0.3, 0.4],
        &BoxConstraint::unbounded(3),
        &LbfgsOptions::default(),
    )
    .unwrap();
    assert_eq!(r.iterations, 0);
    assert!(r.converged());
    // a bound-stationary start: minimizer beyond the lower bound
    let mut q = Quadratic::new([-9.0, -9.0, -9.0]);
    q.a = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let b = BoxConstraint::uniform(3, 0.0, 1.0).unwrap();
    let r = projected_lbfgs(&mut q, &[0.0; 3], &b, &LbfgsOptions::default()).unwrap();
    assert_eq!(r.iterations, 0);
}

#[test]
fn stationarity_measure_cases() {
    let q = Quadratic::new([0.0; 3]);
    let b = BoxConstraint::uniform(3, 0.0, 1.0).unwrap();
    // interior: equals ‖g‖ when the projected step stays inside
    let s = stationarity_measure(&q, &[0.5, 0.5, 0.5], &[0.1, -0.2, 0.05], &b);
    assert!((s - (0.01f64 + 0.04 + 0.0025).sqrt()).abs() < 1e-15);
    // at the lower bound with g > 0
    assert_eq!(
        stationarity_measure(&q, &[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &b),
        0.0
    );
    // hand computed: x = (0.2, 0.9), g = (0.5, −0.4) on [0,1]²
    let b2 = BoxConstraint::uniform(2, 0.0, 1.0).unwrap();
    struct Two;
    impl Objective for Two {
        fn dim(&self) -> usize {
            2
        }
        fn evaluate(&mut self, _: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
            Ok((0.0, vec![0.0; 2]))
        }
    }
    let s = stationarity_measure(&Two, &[0.2, 0.9], &[0.5, -0.4], &b2);
    // Π(−0.3, 1.3) = (0, 1); difference (0.2, −0.1)
    assert!((s - 0.05f64.sqrt()).abs() < 1e-15);
}

#[test]
fn invalid_boxes_are_rejected() {
    assert!(matches!(
        BoxConstraint::new(vec![1.0], vec![0.0]),
        Err(BoxError::Crossed { index: 0, .. })
    ));
    assert!(BoxConstraint::new(vec![0.0], vec![]).is_err());
    assert!(BoxConstraint::new(vec![f64::NAN], vec![1.0]).is_err());
}

/// Maximize x subject to 1 − x ≥ c, i.e. minimize −x + (γ/2)·max(0, x − (1 − c))².
/// The penalized minimizer is x = 1 − c + 1/γ.
struct Surrogate {
    c: f64,
    gamma: f64,
    last: f64,
}

impl Objective for Surrogate {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>), SolveError> {
        let v = (x[0] - (1.0 - self.c)).max(0.0);
        self.last = v;
        Ok((
            -x[0] + 0.5 * self.gamma * v * v,
            vec![-1.0 + self.gamma * v],
        ))
    }
}

impl PenalizedObjective for Surrogate {
    fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
    }

    fn constraint_violation(&self) -> f64 {
        self.last
    }
}

#[test]
fn homotopy_matches_closed_form_penalized_minimizer() {
    let mut s = Surrogate {
        c: 0.85,
        gamma: 1.0,
        last: 0.0,
    };
    let inner = LbfgsOptions {
        tol_rel: 1e-12,
        ..LbfgsOptions::default()
    };
    let opts = HomotopyOptions::geometric(10.0, 6, inner);
    let b = BoxConstraint::uniform(1, 0.0, 10.0).unwrap();
    let r = moreau_yosida_homotopy(&mut s, &[0.0], &b, &opts).unwrap();
    assert_eq!(r.stages.len(), 7);
    let exact = 1.0 - 0.85 + 1e-6;
    assert!(
        (r.final_controls[0] - exact).abs() < 1e-6,
        "{}",
        r.final_controls[0]
    );
    assert!(r.constraint_violation.unwrap() < 1.1e-6);
    for (stage, gamma) in r.stages.iter().zip(&opts.gammas) {
        assert_eq!(stage.gamma, *gamma);
        assert!((stage.violation - 1.0 / gamma).abs() < 1e-8);
    }
}

#[test]
fn report_serializes_with_histories() {
    let mut q = Quadratic::new([1.0, 2.0, 3.0]);
    let r = projected_lbfgs(
        &mut q,
        &[0.0; 3],
        &BoxConstraint::unbounded(3),
        &LbfgsOptions::default(),
    )
    .unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in [
        "iterations",
        "cost_history",
        "stationarity_history",
        "state_solves",
        "adjoint_solves",
        "final_controls",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["status"], "converged");
    assert!(v.get("constraint_violation").is_none());
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_feasible(
        x in prop::collection::vec(-10.0f64..10.0, 4),
        lo in prop::collection::vec(-5.0f64..0.0, 4),
        width in prop::collection::vec(0.0f64..5.0, 4),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(a, w)| a + w).collect();
        let b = BoxConstraint::new(lo, hi).unwrap();
        let p = b.project(&x);
        prop_assert!(b.contains(&p));
        prop_assert_eq!(b.project(&p), p);
    }

    #[test]
    fn iterates_stay_feasible_and_costs_decrease(
        c in prop::collection::vec(-3.0f64..3.0, 3),
        x0 in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let mut q = Quadratic::new([c[0], c[1], c[2]]);
        let b = BoxConstraint::uniform(3, -1.0, 1.0).unwrap();
        let r = projected_lbfgs(&mut q, &x0, &b, &LbfgsOptions::default()).unwrap();
        prop_assert!(b.contains(&r.final_controls));
        for w in r.cost_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(r.converged());
    }
}
