use ipd_learning::fixed_points::classify_interior;
use ipd_learning::game::{JointStrategy, PayoffMatrix};
use ipd_learning::learning::{integrate, IntegratorConfig, LearningSpeeds, Terminal};
use ipd_learning::sweep::{grid4d, SweepOptions};

fn quick() -> IntegratorConfig {
    IntegratorConfig {
        sample_interval: 10.0,
        ..IntegratorConfig::default()
    }
}

// Exactly symmetric starts never leave the diagonal subspace, so they can
// settle on a symmetric saddle of the interior manifold.
#[test]
fn symmetric_start_can_reach_a_saddle() {
    let pay = PayoffMatrix::new(5.0, 4.5, 1.0, 0.0).unwrap();
    let sp = LearningSpeeds::default();
    let init = JointStrategy::new(0.375, 0.125, 0.375, 0.125).unwrap();
    let rec = integrate(&pay, &init, &sp, &quick()).unwrap();
    assert_eq!(rec.terminal, Terminal::Interior);
    let e = rec.final_eq().unwrap();
    assert_eq!(e.x_e, e.y_e);

    let report = classify_interior(&pay, e.x_e, e.y_e, &sp).unwrap();
    assert!(!report.stable);
    assert!(report.classified[0].re > 0.1);

    let nudged = JointStrategy::new(0.375 + 1e-9, 0.125, 0.375, 0.125).unwrap();
    let rec = integrate(&pay, &nudged, &sp, &quick()).unwrap();
    assert_eq!(rec.terminal, Terminal::PureDD);
}

#[test]
fn non_submodular_grid_has_no_asymmetric_attractor() {
    let pay = PayoffMatrix::new(5.0, 4.5, 1.0, 0.0).unwrap();
    let opts = SweepOptions {
        integrator: quick(),
        ..SweepOptions::default()
    };
    let g = grid4d(&pay, &LearningSpeeds::default(), 4, &opts).unwrap();
    for c in &g.cells {
        match c.terminal {
            Terminal::PureCC | Terminal::PureDD => {}
            _ => {
                let [x_c, x_d, y_c, y_d] = c.init.as_array();
                assert!(x_c == y_c && x_d == y_d, "{:?}", c.init);
                assert_eq!(c.x_e_star, c.y_e_star);
            }
        }
    }
}

#[test]
fn submodular_grid_reaches_exploitation() {
    let pay = PayoffMatrix::new(5.0, 3.0, 1.0, 0.0).unwrap();
    let opts = SweepOptions {
        integrator: quick(),
        ..SweepOptions::default()
    };
    let g = grid4d(&pay, &LearningSpeeds::default(), 4, &opts).unwrap();
    assert!(g
        .cells
        .iter()
        .any(|c| c.terminal == Terminal::Interior && c.exploitation.abs() > 0.05));
}

#[test]
fn swapping_players_swaps_the_trajectory() {
    let pay = PayoffMatrix::new(5.0, 3.25, 1.0, 0.0).unwrap();
    let sp = LearningSpeeds::default();
    let init = JointStrategy::new(0.9, 0.1, 0.9, 0.25).unwrap();
    let a = integrate(&pay, &init, &sp, &quick()).unwrap();
    let b = integrate(&pay, &init.swapped(), &sp, &quick()).unwrap();
    assert_eq!(a.times, b.times);
    for (s, t) in a.states.iter().zip(&b.states) {
        assert_eq!(s.swapped(), *t);
    }
}
