use std::path::Path;

use serde::Serialize;

use super::config::{ProblemConfig, SlopeExpectation};
use super::{format_f64, to_json};
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure};
use crate::model::{BoundaryFormulation, ValidationReport};
use crate::residual::ResidualRow;
use crate::solver::Trajectory;
use crate::verify::{ConvergenceReport, ReferenceGrid, SlopeFit};

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("CSV fields are ASCII")
}

fn record(writer: &mut csv::Writer<Vec<u8>>, fields: &[String]) {
    writer.write_record(fields).expect("writing to memory cannot fail");
}

fn optional(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// `location,mass`, one row per atom in storage order.
pub fn measure_csv(measure: &DiscreteMeasure) -> String {
    let mut w = csv_writer();
    record(&mut w, &["location".into(), "mass".into()]);
    for a in measure.atoms() {
        record(&mut w, &[format_f64(a.location), format_f64(a.mass)]);
    }
    finish(w)
}

/// Parses a `location,mass` table. Whitespace around fields is ignored.
pub fn parse_measure_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "location" || &headers[1] != "mass" {
        return Err(Error::Parse {
            line: 1,
            reason: "expected header `location,mass`".into(),
        });
    }
    let mut atoms = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 2 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 2 fields, found {}", row.len()),
            });
        }
        let number = |field: &str, name: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                reason: format!("{name} `{field}` is not a number"),
            })
        };
        atoms.push(Atom::new(number(&row[0], "location")?, number(&row[1], "mass")?));
    }
    DiscreteMeasure::new(atoms).map_err(|e| match e {
        Error::InvalidMeasure(reason) => Error::Parse { line: 0, reason },
        other => other,
    })
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_measure_csv(&text)
}

/// `t,cohort_index,N,X`, one row per cohort per snapshot, boundary cohort first.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut w = csv_writer();
    record(&mut w, &["t".into(), "cohort_index".into(), "N".into(), "X".into()]);
    for snap in &traj.snapshots {
        let t = format_f64(snap.t);
        let s = &snap.state;
        record(
            &mut w,
            &[
                t.clone(),
                s.boundary.index.to_string(),
                format_f64(s.boundary.abundance),
                format_f64(s.boundary.center),
            ],
        );
        for c in &s.internal {
            record(
                &mut w,
                &[
                    t.clone(),
                    c.index.to_string(),
                    format_f64(c.abundance),
                    format_f64(c.center),
                ],
            );
        }
    }
    finish(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMetadata<'a> {
    pub config: &'a ProblemConfig,
    pub model: &'a str,
    pub boundary_formulation: BoundaryFormulation,
    pub h_eff: f64,
    pub steps_per_interval: usize,
    pub internalization_times: &'a [f64],
    pub snapshots: usize,
    pub pruned_cohorts: usize,
    pub prune_mass_loss: f64,
    pub final_total_mass: f64,
}

pub fn trajectory_metadata(config: &ProblemConfig, traj: &Trajectory) -> String {
    to_json(&TrajectoryMetadata {
        config,
        model: &traj.problem.model_name,
        boundary_formulation: traj.problem.formulation,
        h_eff: traj.step,
        steps_per_interval: traj.steps_per_interval,
        internalization_times: &traj.internalization_times,
        snapshots: traj.snapshots.len(),
        pruned_cohorts: traj.pruned_cohorts,
        prune_mass_loss: traj.pruned_mass,
        final_total_mass: traj.final_snapshot().state.total_mass(),
    })
}

/// `phi_id,t1,t2,quadrature,closed_form,abs_diff`.
pub fn residual_csv(rows: &[ResidualRow]) -> String {
    let mut w = csv_writer();
    record(
        &mut w,
        &["phi_id", "t1", "t2", "quadrature", "closed_form", "abs_diff"].map(String::from),
    );
    for r in rows {
        record(
            &mut w,
            &[
                r.phi_id.to_string(),
                format_f64(r.t1),
                format_f64(r.t2),
                format_f64(r.quadrature),
                format_f64(r.closed_form),
                format_f64(r.abs_diff),
            ],
        );
    }
    finish(w)
}

/// `N,n,h_eff,flat_error,functional_error,residual_norm,mass_bound_ok,runtime_s`.
///
/// Missing values are empty fields. `runtime_s` is left empty unless
/// `with_runtime` is set, so that the file is reproducible by default.
pub fn converge_csv(report: &ConvergenceReport, with_runtime: bool) -> String {
    let mut w = csv_writer();
    record(
        &mut w,
        &[
            "N",
            "n",
            "h_eff",
            "flat_error",
            "functional_error",
            "residual_norm",
            "mass_bound_ok",
            "runtime_s",
        ]
        .map(String::from),
    );
    for r in &report.rows {
        record(
            &mut w,
            &[
                r.cohorts.to_string(),
                r.intervals.to_string(),
                format_f64(r.step),
                optional(r.flat_error),
                optional(r.functional_error),
                optional(r.residual_norm),
                r.mass_bound_ok.to_string(),
                if with_runtime {
                    format_f64(r.runtime_s)
                } else {
                    String::new()
                },
            ],
        );
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationOutcome {
    pub expectation: SlopeExpectation,
    pub fitted: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFailure {
    #[serde(rename = "N")]
    pub cohorts: usize,
    #[serde(rename = "n")]
    pub intervals: usize,
    pub failure: String,
}

/// Deterministic study summary: fitted slopes, failures and assertion outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeSummary {
    pub model: String,
    pub boundary_formulation: BoundaryFormulation,
    pub horizon: f64,
    pub reference: Option<ReferenceGrid>,
    pub slopes: Vec<SlopeFit>,
    pub all_mass_bounds_ok: bool,
    pub failures: Vec<RowFailure>,
    pub expectations: Vec<ExpectationOutcome>,
    /// Every expectation met, every row succeeded and satisfied the mass bound.
    pub passed: bool,
}

impl ConvergeSummary {
    pub fn new(report: &ConvergenceReport, expectations: &[SlopeExpectation]) -> Self {
        let outcomes: Vec<ExpectationOutcome> = expectations
            .iter()
            .map(|e| {
                let fitted = report.slope(e.metric.name(), e.axis.name());
                ExpectationOutcome {
                    expectation: *e,
                    fitted,
                    pass: fitted.is_some_and(|s| (s - e.slope).abs() <= e.tolerance),
                }
            })
            .collect();
        let failures: Vec<RowFailure> = report
            .rows
            .iter()
            .filter_map(|r| {
                r.failure.as_ref().map(|f| RowFailure {
                    cohorts: r.cohorts,
                    intervals: r.intervals,
                    failure: f.clone(),
                })
            })
            .collect();
        let all_mass_bounds_ok = report.rows.iter().all(|r| r.mass_bound_ok);
        ConvergeSummary {
            model: report.model.clone(),
            boundary_formulation: report.formulation,
            horizon: report.horizon,
            reference: report.reference.clone(),
            slopes: report.slopes.clone(),
            all_mass_bounds_ok,
            passed: all_mass_bounds_ok && failures.is_empty() && outcomes.iter().all(|o| o.pass),
            failures,
            expectations: outcomes,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn validation_json(report: &ValidationReport) -> String {
    to_json(report)
}
