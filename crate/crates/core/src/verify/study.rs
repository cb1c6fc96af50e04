use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_mass_bound, flat_error, functional_error, FlatReference, ORACLE_TOL};
use crate::error::{Error, Result};
use crate::model::{BoundaryFormulation, ProblemSpec};
use crate::residual::{boundary_correction, residual_norm, standard_family, TestFunction};
use crate::solver::{run, RunOptions};

/// Grid and options of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    /// Initial cohort counts `N`.
    pub cohorts: Vec<usize>,
    /// Internalization interval counts `n`.
    pub intervals: Vec<usize>,
    /// Requested RK4 step; capped per row so every interval holds at least two steps.
    pub step: f64,
    pub prune_epsilon: f64,
    /// Compute flat errors against a finer self-reference run.
    pub self_reference: bool,
    /// Refinement factor of the self-reference over the finest grid point.
    pub reference_factor: usize,
}

impl StudyConfig {
    pub fn new(cohorts: Vec<usize>, intervals: Vec<usize>, step: f64) -> Self {
        StudyConfig {
            cohorts,
            intervals,
            step,
            prune_epsilon: 0.0,
            self_reference: true,
            reference_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub cohorts: usize,
    pub intervals: usize,
    pub step: f64,
    pub flat_error: Option<f64>,
    pub functional_error: Option<f64>,
    pub residual_norm: Option<f64>,
    pub mass_bound_ok: bool,
    pub runtime_s: f64,
    /// Diagnostic if the row's run or its evaluation failed.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceGrid {
    pub cohorts: usize,
    pub intervals: usize,
    pub step: f64,
}

/// Log-log slope of one error column along one grid axis, the other axis held at its finest value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub metric: String,
    /// `"N"` or `"n"`.
    pub axis: String,
    /// Value of the other axis.
    pub fixed: usize,
    /// Points used after dropping errors at the quadrature floor.
    pub points: usize,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub formulation: BoundaryFormulation,
    pub horizon: f64,
    pub reference: Option<ReferenceGrid>,
    pub rows: Vec<StudyRow>,
    pub slopes: Vec<SlopeFit>,
}

impl ConvergenceReport {
    pub fn slope(&self, metric: &str, axis: &str) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.metric == metric && s.axis == axis)
            .and_then(|s| s.slope)
    }

    pub fn row(&self, cohorts: usize, intervals: usize) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.cohorts == cohorts && r.intervals == intervals)
    }
}

/// Errors below this are treated as floor noise and excluded from slope fits.
pub const SLOPE_FLOOR: f64 = 10.0 * ORACLE_TOL;

/// Least-squares slope of `ln y` against `ln x`, skipping points with
/// `y < floor`. `None` with fewer than three usable points.
pub fn fit_log_slope(points: &[(f64, f64)], floor: f64) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && y.is_finite() && *y >= floor && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if usable.len() < 3 {
        return None;
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn row_step(problem: &ProblemSpec, intervals: usize, step: f64) -> f64 {
    step.min(problem.horizon / (2 * intervals) as f64)
}

fn evaluate_row(
    problem: &ProblemSpec,
    config: &StudyConfig,
    family: &[TestFunction],
    reference: Option<&crate::measure::DiscreteMeasure>,
    cohorts: usize,
    intervals: usize,
) -> StudyRow {
    let started = Instant::now();
    let step = row_step(problem, intervals, config.step);
    let mut row = StudyRow {
        cohorts,
        intervals,
        step,
        flat_error: None,
        functional_error: None,
        residual_norm: None,
        mass_bound_ok: false,
        runtime_s: 0.0,
        failure: None,
    };
    let grid = problem.with_grid(cohorts, intervals);
    let options = RunOptions::new(step).with_prune_epsilon(config.prune_epsilon);
    let outcome = run(&grid, &options).and_then(|traj| {
        row.step = traj.step;
        row.mass_bound_ok = check_mass_bound(&traj).map_or(true, |c| c.ok);
        if let Some(m) = reference {
            row.flat_error = Some(flat_error(&traj, FlatReference::Atoms(m))?);
        }
        if problem.rates.constant_coefficients().is_some() {
            row.functional_error = Some(functional_error(&traj, family)?);
        }
        row.residual_norm = Some(residual_norm(&traj, family)?);
        Ok(())
    });
    if let Err(e) = outcome {
        row.failure = Some(e.to_string());
    }
    row.runtime_s = started.elapsed().as_secs_f64();
    row
}

/// Runs every `(N, n)` combination, in parallel on the current rayon pool, and
/// fits error slopes along each axis. Rows come back in grid order (`N` major).
/// Per-row failures are recorded in the row; only a failing reference run is fatal.
pub fn convergence_study(problem: &ProblemSpec, config: &StudyConfig) -> Result<ConvergenceReport> {
    if config.cohorts.is_empty() || config.intervals.is_empty() {
        return Err(Error::Verify("study grids must be non-empty".into()));
    }
    for (name, grid) in [("N", &config.cohorts), ("n", &config.intervals)] {
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
            return Err(Error::Verify(format!(
                "{name} grid must be positive and strictly increasing"
            )));
        }
    }
    if !(config.step.is_finite() && config.step > 0.0) {
        return Err(Error::Verify("study step must be positive".into()));
    }
    problem.validate()?;
    let n_max = *config.cohorts.last().expect("non-empty");
    let i_max = *config.intervals.last().expect("non-empty");

    let (reference_grid, reference) = if config.self_reference {
        let factor = config.reference_factor.max(2);
        let fine = problem.with_grid(factor * n_max, factor * i_max);
        let options = RunOptions::new(config.step)
            .with_prune_epsilon(config.prune_epsilon)
            .with_snapshot_stride(usize::MAX);
        let traj = run(&fine, &options)?;
        (
            Some(ReferenceGrid {
                cohorts: fine.initial_cohorts,
                intervals: fine.internalizations,
                step: traj.step,
            }),
            Some(traj.final_measure()),
        )
    } else {
        (None, None)
    };

    let family = standard_family(problem);
    let jobs: Vec<(usize, usize)> = config
        .cohorts
        .iter()
        .flat_map(|&c| config.intervals.iter().map(move |&i| (c, i)))
        .collect();
    let rows: Vec<StudyRow> = jobs
        .par_iter()
        .map(|&(c, i)| evaluate_row(problem, config, &family, reference.as_ref(), c, i))
        .collect();

    let mut slopes = Vec::new();
    for metric in ["flat_error", "functional_error", "residual_norm"] {
        let value = |r: &StudyRow| match metric {
            "flat_error" => r.flat_error,
            "functional_error" => r.functional_error,
            _ => r.residual_norm,
        };
        if rows.iter().all(|r| value(r).is_none()) {
            continue;
        }
        for (axis, fixed) in [("N", i_max), ("n", n_max)] {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| {
                    if axis == "N" {
                        r.intervals == fixed
                    } else {
                        r.cohorts == fixed
                    }
                })
                .filter_map(|r| {
                    let x = if axis == "N" { r.cohorts } else { r.intervals };
                    value(r).map(|y| (x as f64, y))
                })
                .collect();
            let usable = points.iter().filter(|(_, y)| *y >= SLOPE_FLOOR).count();
            slopes.push(SlopeFit {
                metric: metric.to_string(),
                axis: axis.to_string(),
                fixed,
                points: usable,
                slope: fit_log_slope(&points, SLOPE_FLOOR),
            });
        }
    }

    Ok(ConvergenceReport {
        model: problem.model_name.clone(),
        formulation: problem.formulation,
        horizon: problem.horizon,
        reference: reference_grid,
        rows,
        slopes,
    })
}

/// Largest per-interval magnitude of the original-formulation boundary
/// correction over `family`, for each interval count. Returns `(Δt, magnitude)` pairs.
pub fn correction_profile(
    problem: &ProblemSpec,
    intervals: &[usize],
    step: f64,
    family: &[TestFunction],
) -> Result<Vec<(f64, f64)>> {
    let original = problem.with_formulation(BoundaryFormulation::Original);
    intervals
        .iter()
        .map(|&n| {
            let grid = original.with_grid(original.initial_cohorts, n);
            let traj = run(&grid, &RunOptions::new(row_step(&grid, n, step)))?;
            let mut worst = 0.0f64;
            for w in traj.breakpoints.windows(2) {
                for phi in family {
                    worst = worst.max(boundary_correction(&traj, phi, w[0], w[1])?.abs());
                }
            }
            Ok((grid.horizon / n as f64, worst))
        })
        .collect()
}
