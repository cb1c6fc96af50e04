//! Reference solutions, error measures and bound checks for EBT runs.
//!
//! Two tiers of reference exist. Feedback-free constant-coefficient models have
//! an exact solution along characteristics, evaluated here as functionals
//! `∫φ dζ_T` by adaptive quadrature ([`oracle_functional`]). Everything else is
//! compared against a finer run of the same scheme in the flat metric.
//! Functional errors are lower bounds on the flat distance and are always
//! reported separately from it.

mod study;

use serde::Serialize;

pub use study::{
    convergence_study, correction_profile, fit_log_slope, ConvergenceReport, ReferenceGrid, SlopeFit, StudyConfig,
    StudyRow, SLOPE_FLOOR,
};

use crate::error::{Error, Result};
use crate::measure::{flat_distance, DiscreteMeasure};
use crate::model::ProblemSpec;
use crate::quadrature::adaptive_simpson_split;
use crate::residual::{standard_family, TestFunction};
use crate::solver::Trajectory;

/// Absolute tolerance of the oracle quadratures.
pub const ORACLE_TOL: f64 = 1e-10;

/// Relative slack on the population-growth bound.
pub const MASS_BOUND_SLACK: f64 = 1e-8;

/// `∫φ(·,t) dζ_t` for the exact solution of a feedback-free constant-coefficient problem.
///
/// The initial population is carried along `x0 ↦ x0 + g0·t` with survival
/// `e^{−μ0 t}`; newborns entering at time `s` sit at `x_b + g0(t − s)` with
/// density `β0·P(s)`, `P(s) = P(0)e^{(β0 − μ0)s}`.
pub fn oracle_functional(problem: &ProblemSpec, phi: &TestFunction, t: f64) -> Result<f64> {
    let c = problem.rates.constant_coefficients().ok_or_else(|| {
        Error::Verify(format!(
            "model `{}` has no constant coefficients; no exact oracle",
            problem.model_name
        ))
    })?;
    let (g0, mu0, beta0) = (c.growth, c.mortality, c.fecundity);
    let (lo, hi) = phi.support();
    let shift = g0 * t;
    let survival = (-mu0 * t).exp();
    let transported = problem.initial.integrate(
        &|x0| phi.value(x0 + shift, t) * survival,
        &[lo - shift, phi.center - shift, hi - shift],
    )?;

    let p0 = problem.initial.total_mass();
    let births = if beta0 == 0.0 || p0 == 0.0 || t <= 0.0 {
        0.0
    } else {
        let x_b = problem.x_b;
        let entry = |x: f64| if g0 > 0.0 { t - (x - x_b) / g0 } else { f64::NAN };
        let breaks: Vec<f64> = [lo, phi.center, hi]
            .iter()
            .map(|&x| entry(x))
            .filter(|s| s.is_finite() && *s > 0.0 && *s < t)
            .collect();
        adaptive_simpson_split(
            &|s| phi.value(x_b + g0 * (t - s), t) * (-mu0 * (t - s)).exp() * beta0 * p0 * ((beta0 - mu0) * s).exp(),
            0.0,
            t,
            &breaks,
            ORACLE_TOL,
        )
    };
    let value = transported + births;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Verify(format!("oracle functional is {value}")))
    }
}

/// What a run's final measure is compared against.
#[derive(Debug, Clone, Copy)]
pub enum FlatReference<'a> {
    /// A reference measure at the final time, typically from a much finer run.
    Atoms(&'a DiscreteMeasure),
    /// The exact-solution functionals over the standard test-function family.
    Functional,
}

/// Error of the final measure against `reference`: the flat distance for an
/// atomic reference, or [`functional_error`] (a lower bound on it) otherwise.
pub fn flat_error(traj: &Trajectory, reference: FlatReference<'_>) -> Result<f64> {
    match reference {
        FlatReference::Atoms(m) => flat_distance(&traj.final_measure(), m),
        FlatReference::Functional => functional_error(traj, &standard_family(&traj.problem)),
    }
}

/// `max_φ |∫φ(·,T)dζ_T − oracle(φ)| / ‖φ(·,T)‖_{W^{1,∞}}` over `family`.
pub fn functional_error(traj: &Trajectory, family: &[TestFunction]) -> Result<f64> {
    let t = traj.final_snapshot().t;
    let measure = traj.final_measure();
    let mut worst = 0.0f64;
    for phi in family {
        let norm = phi.w1_inf_norm(t);
        if norm == 0.0 {
            continue;
        }
        let approx = measure.integrate(|x| phi.value(x, t))?;
        let exact = oracle_functional(&traj.problem, phi, t)?;
        worst = worst.max((approx - exact).abs() / norm);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBoundCheck {
    pub ok: bool,
    /// Largest `P(t) / (P(0)·e^{β_sup t})` over the snapshots.
    pub worst_ratio: f64,
    pub worst_t: f64,
}

/// `P(t) ≤ P(0)·e^{β_sup t}·(1 + 1e-8)` at every snapshot. `None` when the model declares no bounds.
pub fn check_mass_bound(traj: &Trajectory) -> Option<MassBoundCheck> {
    let beta_sup = traj.problem.rates.declared_bounds()?.fecundity;
    let p0 = traj.snapshots[0].state.total_mass();
    let mut check = MassBoundCheck {
        ok: true,
        worst_ratio: 0.0,
        worst_t: 0.0,
    };
    for snap in &traj.snapshots {
        let bound = p0 * (beta_sup * snap.t).exp();
        let mass = snap.state.total_mass();
        if mass > bound * (1.0 + MASS_BOUND_SLACK) {
            check.ok = false;
        }
        let ratio = if bound > 0.0 {
            mass / bound
        } else if mass > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_t = snap.t;
        }
    }
    Some(check)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBoundCheck {
    pub ok: bool,
    pub thresholds: usize,
    /// `(t, M, tail at t, shifted initial tail)` for each breach.
    pub breaches: Vec<(f64, f64, f64, f64)>,
}

/// For models without reproduction, `tail(ζ_t, M) ≤ tail(ζ_0, M − t·g_sup)` at
/// every snapshot and each threshold `M`. `None` when the model can reproduce
/// or declares no bounds.
pub fn check_tail_bound(traj: &Trajectory, thresholds: &[f64]) -> Option<TailBoundCheck> {
    let bounds = traj.problem.rates.declared_bounds()?;
    if bounds.fecundity > 0.0 {
        return None;
    }
    let initial = traj.snapshots[0].measure();
    let slack = 1e-9 * (1.0 + traj.problem.horizon * bounds.growth);
    let mut check = TailBoundCheck {
        ok: true,
        thresholds: thresholds.len(),
        breaches: Vec::new(),
    };
    for snap in &traj.snapshots {
        let m = snap.measure();
        for &threshold in thresholds {
            let tail = m.tail_mass(threshold);
            let allowed = initial.tail_mass(threshold - snap.t * bounds.growth - slack);
            if tail > allowed * (1.0 + 1e-12) + 1e-15 {
                check.ok = false;
                check.breaches.push((snap.t, threshold, tail, allowed));
            }
        }
    }
    Some(check)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterBoundCheck {
    pub ok: bool,
    /// Largest `(X_B(t) − x_b) / (t − t_i)` observed.
    pub measured_slope: f64,
    /// Declared constant `C = 2·g_sup`.
    pub declared: f64,
}

/// `X_B(t) − x_b ≤ C·(t − t_i)` between consecutive internalizations. `None` without declared bounds.
pub fn check_boundary_center(traj: &Trajectory) -> Option<CenterBoundCheck> {
    let declared = 2.0 * traj.problem.rates.declared_bounds()?.growth;
    let x_b = traj.problem.x_b;
    let mut start = 0.0;
    let mut measured = 0.0f64;
    let mut below = true;
    for snap in &traj.snapshots[1..] {
        let state = snap.left_state();
        let excess = state.boundary.center - x_b;
        let dt = snap.t - start;
        if excess < -1e-12 {
            below = false;
        }
        if dt > 0.0 {
            measured = measured.max(excess / dt);
        }
        if snap.pre_event.is_some() {
            start = snap.t;
        }
    }
    Some(CenterBoundCheck {
        ok: below && measured <= declared * (1.0 + 1e-9) + 1e-12,
        measured_slope: measured,
        declared,
    })
}
