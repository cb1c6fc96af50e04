#![allow(dead_code)]

use std::collections::BTreeMap;

use ebt_core::model::{catalog, BoundaryFormulation, DensityFamily, InitialData, ProblemSpec, Setup};
use ebt_core::DiscreteMeasure;

pub fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn atomic(pairs: &[(f64, f64)]) -> InitialData {
    DiscreteMeasure::from_pairs(pairs).unwrap().into()
}

pub fn uniform(lower: f64, upper: f64, mass: f64) -> InitialData {
    DensityFamily::Uniform { lower, upper, mass }.into()
}

pub fn problem(
    model: &str,
    pairs: &[(&str, f64)],
    initial: InitialData,
    horizon: f64,
    cohorts: usize,
    intervals: usize,
    formulation: BoundaryFormulation,
) -> ProblemSpec {
    catalog::build(
        model,
        &params(pairs),
        Setup {
            x_b: 0.0,
            horizon,
            initial,
            formulation,
            internalizations: intervals,
            initial_cohorts: cohorts,
        },
    )
    .unwrap()
}

/// One problem per catalog model, all with birth size 0 and horizon 1.
pub fn catalog_problems(formulation: BoundaryFormulation, intervals: usize) -> Vec<ProblemSpec> {
    let initial = || atomic(&[(0.3, 0.5), (0.8, 1.0), (1.4, 0.25)]);
    vec![
        problem("pure_decay", &[("mu0", 0.5)], initial(), 1.0, 3, intervals, formulation),
        problem(
            "pure_transport",
            &[("g0", 1.0)],
            initial(),
            1.0,
            3,
            intervals,
            formulation,
        ),
        problem(
            "constant_rates",
            &[("g0", 1.0), ("mu0", 0.2), ("beta0", 0.5)],
            initial(),
            1.0,
            3,
            intervals,
            formulation,
        ),
        problem(
            "ramp_fecundity",
            &[
                ("g0", 0.8),
                ("mu0", 0.1),
                ("beta_max", 1.2),
                ("x_mat", 0.6),
                ("ramp_width", 0.3),
            ],
            initial(),
            1.0,
            3,
            intervals,
            formulation,
        ),
        problem(
            "logistic_feedback",
            &[("g0", 1.0), ("mu0", 0.1), ("mu1", 0.4), ("beta0", 0.8)],
            initial(),
            1.0,
            3,
            intervals,
            formulation,
        ),
    ]
}

pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub mod split_oracle;
