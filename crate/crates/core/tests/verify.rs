mod common;

use common::{atomic, problem, uniform};
use ebt_core::model::BoundaryFormulation::{self, Simplified};
use ebt_core::residual::{bump, standard_family, TestFunction};
use ebt_core::verify::{
    convergence_study, flat_error, functional_error, oracle_functional, FlatReference, StudyConfig,
};
use ebt_core::{run, RunOptions};

/// Composite midpoint rule, written out independently of the crate's quadrature.
fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn oracle_handles_transport_and_decay() {
    let phi = TestFunction::flat(1.5, 0.5);
    let decay = problem(
        "pure_decay",
        &[("mu0", 0.5)],
        atomic(&[(1.4, 2.0)]),
        2.0,
        1,
        1,
        Simplified,
    );
    let expected = 2.0 * (-1.0f64).exp() * bump((1.4 - 1.5) / 0.5);
    assert!((oracle_functional(&decay, &phi, 2.0).unwrap() - expected).abs() < 1e-13);

    let transport = problem(
        "pure_transport",
        &[("g0", 0.5)],
        atomic(&[(0.9, 1.0)]),
        2.0,
        1,
        1,
        Simplified,
    );
    let expected = bump((1.9 - 1.5) / 0.5);
    assert!((oracle_functional(&transport, &phi, 2.0).unwrap() - expected).abs() < 1e-13);
}

#[test]
fn oracle_matches_characteristic_density() {
    let (g0, mu0, beta0, p0, t) = (1.0, 0.2, 0.5, 1.0, 1.0);
    let p = problem(
        "constant_rates",
        &[("g0", g0), ("mu0", mu0), ("beta0", beta0)],
        atomic(&[(1.0, p0)]),
        t,
        1,
        1,
        Simplified,
    );
    // Newborn density at size x: entered at s = t − x/g0 and survived t − s.
    let density = |x: f64| {
        let s = t - x / g0;
        beta0 * p0 * ((beta0 - mu0) * s).exp() * (-mu0 * (t - s)).exp() / g0
    };
    for phi in [
        TestFunction::flat(0.5, 0.5),
        TestFunction::flat(0.2, 0.3),
        TestFunction::flat(1.8, 0.9),
    ] {
        let atom = p0 * (-mu0 * t).exp() * phi.value(1.0 + g0 * t, t);
        let births = midpoint(|x| phi.value(x, t) * density(x), 0.0, g0 * t, 200_000);
        let oracle = oracle_functional(&p, &phi, t).unwrap();
        assert!(
            (oracle - atom - births).abs() < 1e-8,
            "{phi:?}: {oracle} vs {}",
            atom + births
        );
    }
    let frozen = oracle_functional(&p, &TestFunction::flat(0.5, 0.5), t).unwrap();
    assert!((frozen - 0.318_764_870_062).abs() < 1e-9, "{frozen:.12}");
}

#[test]
fn oracle_rejects_feedback_models() {
    let p = problem(
        "logistic_feedback",
        &[("g0", 1.0), ("mu0", 0.1), ("mu1", 0.2), ("beta0", 0.5)],
        atomic(&[(0.5, 1.0)]),
        1.0,
        1,
        1,
        Simplified,
    );
    assert!(oracle_functional(&p, &TestFunction::flat(0.5, 0.5), 1.0).is_err());
}

#[test]
fn flat_error_against_itself_is_zero() {
    let p = problem(
        "ramp_fecundity",
        &[
            ("g0", 0.8),
            ("mu0", 0.1),
            ("beta_max", 1.2),
            ("x_mat", 0.6),
            ("ramp_width", 0.3),
        ],
        uniform(0.0, 1.0, 1.0),
        1.0,
        10,
        10,
        Simplified,
    );
    let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
    assert_eq!(
        flat_error(&traj, FlatReference::Atoms(&traj.final_measure())).unwrap(),
        0.0
    );
}

#[test]
fn pure_decay_functional_error_is_at_quadrature_floor() {
    let p = problem(
        "pure_decay",
        &[("mu0", 0.5)],
        atomic(&[(0.2, 1.0), (1.3, 0.5)]),
        2.0,
        2,
        4,
        Simplified,
    );
    let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
    assert!(flat_error(&traj, FlatReference::Functional).unwrap() <= 1e-8);
}

#[test]
fn finer_self_reference_does_not_increase_error() {
    let p = problem(
        "ramp_fecundity",
        &[
            ("g0", 0.8),
            ("mu0", 0.1),
            ("beta_max", 1.2),
            ("x_mat", 0.3),
            ("ramp_width", 0.3),
        ],
        uniform(0.0, 1.0, 1.0),
        1.0,
        20,
        50,
        BoundaryFormulation::Original,
    );
    let opts = RunOptions::new(1e-3);
    let coarse = run(&p, &opts).unwrap().final_measure();
    let r200 = run(&p.with_grid(80, 200), &opts).unwrap().final_measure();
    let r400 = run(&p.with_grid(160, 400), &opts).unwrap().final_measure();
    let e200 = ebt_core::flat_distance(&coarse, &r200).unwrap();
    let e400 = ebt_core::flat_distance(&coarse, &r400).unwrap();
    let between = ebt_core::flat_distance(&r200, &r400).unwrap();
    assert!(between < e200, "references {between} vs error {e200}");
    assert!((e400 - e200).abs() <= between + 1e-12);
}

#[test]
fn density_functional_error_falls_with_cohort_count() {
    let p = problem(
        "constant_rates",
        &[("g0", 1.0), ("mu0", 0.2), ("beta0", 0.5)],
        uniform(0.0, 1.0, 1.0),
        1.0,
        10,
        100,
        Simplified,
    );
    let family = standard_family(&p);
    let counts = [10.0, 20.0, 40.0, 80.0];
    let errors: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let opts = RunOptions::new(1e-4).with_snapshot_stride(usize::MAX);
            let traj = run(&p.with_grid(c as usize, 5000), &opts).unwrap();
            functional_error(&traj, &family).unwrap()
        })
        .collect();
    let slope = common::log_slope(&counts, &errors);
    assert!(slope <= -0.9, "slope {slope}, errors {errors:?}");
}

#[test]
fn zero_rate_study_has_no_error() {
    let p = problem(
        "pure_transport",
        &[("g0", 0.0)],
        atomic(&[(0.5, 1.0), (1.0, 2.0)]),
        1.0,
        2,
        4,
        Simplified,
    );
    let report = convergence_study(&p, &StudyConfig::new(vec![2, 4], vec![4, 8, 16], 1e-2)).unwrap();
    for row in &report.rows {
        assert!(row.failure.is_none(), "{row:?}");
        assert_eq!(row.flat_error, Some(0.0));
        assert!(row.functional_error.unwrap() < 1e-12);
        assert!(row.residual_norm.unwrap() < 1e-9);
        assert!(row.mass_bound_ok);
    }
    assert!(report.slopes.iter().all(|s| s.slope.is_none()));
}
