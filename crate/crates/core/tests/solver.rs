mod common;

use common::{atomic, catalog_problems, problem, uniform};
use ebt_core::measure::flat_distance;
use ebt_core::model::{BoundaryFormulation, DensityFamily};
use ebt_core::verify::{check_mass_bound, check_tail_bound};
use ebt_core::{run, RunOptions};

const BOTH: [BoundaryFormulation; 2] = [BoundaryFormulation::Simplified, BoundaryFormulation::Original];

#[test]
fn pure_decay_cohorts_decay_exactly() {
    let p = problem(
        "pure_decay",
        &[("mu0", 0.5)],
        atomic(&[(0.2, 1.0), (0.7, 2.0), (1.5, 0.5)]),
        2.0,
        3,
        4,
        BoundaryFormulation::Simplified,
    );
    let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
    let first = &traj.snapshots[0].state;
    let last = &traj.final_snapshot().state;
    for c in &first.internal {
        let end = last.cohort(c.index).unwrap();
        let ratio = end.abundance / c.abundance;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-10, "cohort {}: {ratio}", c.index);
        assert_eq!(end.center, c.center);
    }
}

#[test]
fn pure_transport_moves_centers_by_g0_t() {
    let p = problem(
        "pure_transport",
        &[("g0", 0.75)],
        atomic(&[(0.0, 1.0), (0.4, 1.0), (1.1, 3.0)]),
        2.0,
        3,
        5,
        BoundaryFormulation::Simplified,
    );
    let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
    let first = &traj.snapshots[0].state;
    let last = &traj.final_snapshot().state;
    for c in &first.internal {
        let end = last.cohort(c.index).unwrap();
        assert!((end.center - (c.center + 1.5)).abs() < 1e-12);
        assert_eq!(end.abundance, c.abundance);
    }
}

#[test]
fn constant_rates_total_mass_grows_exponentially() {
    for formulation in BOTH {
        let p = problem(
            "constant_rates",
            &[("g0", 1.0), ("mu0", 0.5), ("beta0", 1.5)],
            uniform(0.0, 1.0, 1.0),
            1.0,
            20,
            10,
            formulation,
        );
        let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
        let mass = traj.final_snapshot().state.total_mass();
        assert!((mass / 1.0f64.exp() - 1.0).abs() < 1e-8, "{formulation}: {mass}");
    }
}

#[test]
fn logistic_without_births_follows_closed_form() {
    let (mu0, mu1, p0) = (0.3, 0.8, 2.0);
    let p = problem(
        "logistic_feedback",
        &[("g0", 0.5), ("mu0", mu0), ("mu1", mu1), ("beta0", 0.0)],
        uniform(0.0, 1.0, p0),
        3.0,
        10,
        6,
        BoundaryFormulation::Simplified,
    );
    let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
    for snap in &traj.snapshots {
        let decay = (-mu0 * snap.t).exp();
        let exact = mu0 * p0 * decay / (mu0 + mu1 * p0 * (1.0 - decay));
        let mass = snap.state.total_mass();
        assert!(
            (mass - exact).abs() < 1e-9 * exact.max(1.0),
            "t = {}: {mass} vs {exact}",
            snap.t
        );
    }
}

#[test]
fn internal_cohorts_never_gain_mass() {
    for formulation in BOTH {
        for p in catalog_problems(formulation, 8) {
            let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
            for pair in traj.snapshots.windows(2) {
                let (before, after) = (&pair[0].state, pair[1].left_state());
                for c in &after.internal {
                    if let Some(prev) = before.cohort(c.index).filter(|_| c.index != before.boundary_index()) {
                        assert!(c.abundance <= prev.abundance * (1.0 + 1e-14), "{}: {c:?}", p.model_name);
                    }
                }
            }
        }
    }
}

#[test]
fn formulations_approach_each_other() {
    let base = problem(
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
        10,
        BoundaryFormulation::Simplified,
    );
    let mut gaps = Vec::new();
    for n in [10, 20, 40, 80] {
        let simplified = run(&base.with_grid(20, n), &RunOptions::new(1e-3)).unwrap();
        let original = run(
            &base.with_grid(20, n).with_formulation(BoundaryFormulation::Original),
            &RunOptions::new(1e-3),
        )
        .unwrap();
        gaps.push(flat_distance(&simplified.final_measure(), &original.final_measure()).unwrap());
    }
    for w in gaps.windows(2) {
        assert!(w[1] <= 1.5 * w[0], "{gaps:?}");
    }
    assert!(gaps[3] < gaps[0], "{gaps:?}");
}

#[test]
fn catalog_respects_mass_and_tail_bounds() {
    let thresholds: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    for formulation in BOTH {
        for p in catalog_problems(formulation, 10) {
            let traj = run(&p, &RunOptions::new(1e-3)).unwrap();
            let mass = check_mass_bound(&traj).unwrap();
            assert!(mass.ok, "{} {formulation}: {mass:?}", p.model_name);
            if let Some(tail) = check_tail_bound(&traj, &thresholds) {
                assert!(tail.ok, "{} {formulation}: {:?}", p.model_name, tail.breaches);
            }
        }
    }
}

#[test]
fn density_initialization_converges_in_cohort_count() {
    let density = DensityFamily::TruncatedExponential {
        lower: 0.0,
        upper: 2.0,
        rate: 1.5,
        mass: 1.0,
    };
    let fine = run(
        &problem(
            "pure_transport",
            &[("g0", 1.0)],
            density.into(),
            0.5,
            4000,
            1,
            BoundaryFormulation::Simplified,
        ),
        &RunOptions::new(0.1),
    )
    .unwrap()
    .final_measure();
    let errors: Vec<f64> = [10, 20, 40, 80]
        .iter()
        .map(|&n| {
            let p = problem(
                "pure_transport",
                &[("g0", 1.0)],
                density.into(),
                0.5,
                n,
                1,
                BoundaryFormulation::Simplified,
            );
            flat_distance(&run(&p, &RunOptions::new(0.1)).unwrap().final_measure(), &fine).unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
}
