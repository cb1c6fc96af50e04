//! Weak-form residual of a trajectory against smooth test functions.
//!
//! For a measure path `σ_t` and reference `ν` at `t1`,
//!
//! ```text
//! R = ∫φ(·,t2)dσ_{t2} − ∫φ(·,t1)dν − ∫∫(φ_t + gφ_x − μφ)dσ_t dt − ∫φ(x_b,t)∫β dσ_t dt
//! ```
//!
//! [`residual_quadrature`] evaluates this directly over the stored snapshots.
//! [`residual_closed_form`] uses the per-interval telescoped form, which for
//! EBT trajectories reduces to the initial mismatch plus the birth placement
//! error `∫(φ(X_B,t) − φ(x_b,t))·B(t)dt`, plus a correction for the original
//! boundary formulation.

mod testfn;

use serde::Serialize;

pub use testfn::{bump, bump_slope, bump_slope_sup, standard_family, TemporalProfile, TestFunction, TestValue};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::model::{BoundaryFormulation, InitialData};
use crate::quadrature::simpson_irregular;
use crate::solver::{rhs, CohortState, Trajectory};

/// Anything `∫φ dν` can be taken against.
pub trait Reference {
    fn integrate_fn(&self, f: &dyn Fn(f64) -> f64, breakpoints: &[f64]) -> Result<f64>;
}

impl Reference for DiscreteMeasure {
    fn integrate_fn(&self, f: &dyn Fn(f64) -> f64, _breakpoints: &[f64]) -> Result<f64> {
        self.integrate(f)
    }
}

impl Reference for InitialData {
    fn integrate_fn(&self, f: &dyn Fn(f64) -> f64, breakpoints: &[f64]) -> Result<f64> {
        self.integrate(f, breakpoints)
    }
}

fn reference_term(phi: &TestFunction, t: f64, nu: &dyn Reference) -> Result<f64> {
    let (lo, hi) = phi.support();
    nu.integrate_fn(&|x| phi.value(x, t), &[lo, phi.center, hi])
}

fn finite(value: f64, what: &str, t: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Residual(format!("{what} is {value} at t = {t}")))
    }
}

/// Snapshot states covering `[t1, t2]`, split at internalization times so each
/// piece is smooth. Pieces start with the post-event state and end with the
/// pre-event state.
fn pieces(traj: &Trajectory, t1: f64, t2: f64) -> Result<Vec<Vec<&CohortState>>> {
    if t1.partial_cmp(&t2) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Residual(format!("need t1 < t2, got [{t1}, {t2}]")));
    }
    let i1 = traj
        .snapshot_at(t1)
        .ok_or_else(|| Error::Residual(format!("t1 = {t1} is not a snapshot time")))?;
    let i2 = traj
        .snapshot_at(t2)
        .ok_or_else(|| Error::Residual(format!("t2 = {t2} is not a snapshot time")))?;
    let mut out = Vec::new();
    let mut current = vec![&traj.snapshots[i1].state];
    for k in i1 + 1..=i2 {
        let snap = &traj.snapshots[k];
        current.push(snap.left_state());
        if k < i2 && snap.pre_event.is_some() {
            out.push(std::mem::replace(&mut current, vec![&snap.state]));
        }
    }
    out.push(current);
    if let Some(p) = out.iter().find(|p| p.len() < 3) {
        return Err(Error::Residual(format!(
            "only {} snapshots on a smooth piece of [{t1}, {t2}]; need at least 3",
            p.len()
        )));
    }
    Ok(out)
}

fn integrate_pieces(pieces: &[Vec<&CohortState>], mut f: impl FnMut(&CohortState) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for piece in pieces {
        let ts: Vec<f64> = piece.iter().map(|s| s.t).collect();
        let fs = piece.iter().map(|s| f(s)).collect::<Result<Vec<_>>>()?;
        total += simpson_irregular(&ts, &fs)?;
    }
    Ok(total)
}

/// `R_φ(σ, ν, t1, t2)` evaluated term by term from the snapshots.
pub fn residual_quadrature(traj: &Trajectory, phi: &TestFunction, t1: f64, t2: f64, nu: &dyn Reference) -> Result<f64> {
    let pieces = pieces(traj, t1, t2)?;
    let rates = traj.problem.rates.as_ref();
    let x_b = traj.problem.x_b;
    let end = pieces.last().and_then(|p| p.last()).expect("non-empty pieces");
    let end_term = end.assemble_measure().integrate(|x| phi.value(x, t2))?;
    let start_term = reference_term(phi, t1, nu)?;

    let transport = integrate_pieces(&pieces, |state| {
        let env = state.assemble_measure();
        let t = state.t;
        let mut sum = 0.0;
        for a in env.atoms().iter().filter(|a| a.mass != 0.0) {
            let v = phi.eval(a.location, t);
            if v.value == 0.0 && v.d_dx == 0.0 && v.d_dt == 0.0 {
                continue;
            }
            let g = rates.growth(a.location, &env);
            let mu = rates.mortality(a.location, &env);
            sum += a.mass * (v.d_dt + g * v.d_dx - mu * v.value);
        }
        finite(sum, "transport integrand", t)
    })?;

    let births = integrate_pieces(&pieces, |state| {
        let t = state.t;
        let at_birth = phi.value(x_b, t);
        if at_birth == 0.0 {
            return Ok(0.0);
        }
        let env = state.assemble_measure();
        let flux: f64 = env
            .atoms()
            .iter()
            .filter(|a| a.mass != 0.0)
            .map(|a| rates.fecundity(a.location, &env) * a.mass)
            .sum();
        finite(at_birth * flux, "birth integrand", t)
    })?;

    finite(end_term - start_term - transport - births, "residual", t2)
}

/// The telescoped residual over an interval free of internalizations.
pub fn residual_closed_form(
    traj: &Trajectory,
    phi: &TestFunction,
    t1: f64,
    t2: f64,
    nu: &dyn Reference,
) -> Result<f64> {
    let pieces = pieces(traj, t1, t2)?;
    if pieces.len() > 1 {
        return Err(Error::Residual(format!(
            "an internalization lies inside ({t1}, {t2}); split the interval"
        )));
    }
    let start = pieces[0][0];
    let mismatch = start.assemble_measure().integrate(|x| phi.value(x, t1))? - reference_term(phi, t1, nu)?;
    let x_b = traj.problem.x_b;
    let placement = integrate_pieces(&pieces, |state| {
        let d = rhs(state, &traj.problem).map_err(|e| Error::Residual(e.to_string()))?;
        let t = state.t;
        finite(
            (phi.value(state.boundary.center, t) - phi.value(x_b, t)) * d.birth_flux,
            "birth placement integrand",
            t,
        )
    })?;
    let correction = match traj.problem.formulation {
        BoundaryFormulation::Simplified => 0.0,
        BoundaryFormulation::Original => correction_integral(traj, phi, &pieces)?,
    };
    finite(mismatch + placement + correction, "residual", t2)
}

fn correction_integral(traj: &Trajectory, phi: &TestFunction, pieces: &[Vec<&CohortState>]) -> Result<f64> {
    let rates = traj.problem.rates.as_ref();
    let x_b = traj.problem.x_b;
    let h = crate::model::fd_step(x_b);
    integrate_pieces(pieces, |state| {
        let t = state.t;
        let b = state.boundary;
        let x = b.center;
        let v = phi.eval(x, t);
        if b.abundance == 0.0 || (v.value == 0.0 && v.d_dx == 0.0) {
            return Ok(0.0);
        }
        let env = state.assemble_measure();
        let d = rhs(state, &traj.problem).map_err(|e| Error::Residual(e.to_string()))?;
        let g = rates.growth(x, &env);
        let mu_shift = rates.mortality(x, &env) - rates.mortality(x_b, &env);
        let mu_x = crate::model::mortality_slope(rates, x_b, &env, h);
        let value =
            (d.boundary_center_flux - b.abundance * g) * v.d_dx + (mu_shift * b.abundance - mu_x * b.excess) * v.value;
        finite(value, "boundary correction integrand", t)
    })
}

/// Integral of the original-formulation correction term alone over `[t1, t2]`
/// (zero for the simplified formulation).
pub fn boundary_correction(traj: &Trajectory, phi: &TestFunction, t1: f64, t2: f64) -> Result<f64> {
    let pieces = pieces(traj, t1, t2)?;
    match traj.problem.formulation {
        BoundaryFormulation::Simplified => Ok(0.0),
        BoundaryFormulation::Original => correction_integral(traj, phi, &pieces),
    }
}

/// Which route evaluates the per-interval residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm,
}

/// `R_φ(ζ, ν_0, 0, T)` assembled interval by interval, each interval referenced
/// to the trajectory's own measure at its start (the problem's initial data on
/// the first interval).
pub fn chained_residual(traj: &Trajectory, phi: &TestFunction, method: Method) -> Result<f64> {
    let mut total = 0.0;
    for (i, w) in traj.breakpoints.windows(2).enumerate() {
        let (t1, t2) = (w[0], w[1]);
        let r = if i == 0 {
            interval_residual(traj, phi, t1, t2, &traj.problem.initial, method)?
        } else {
            let start = traj.snapshot_at(t1).expect("internalization times are snapshots");
            let nu = traj.snapshots[start].measure();
            interval_residual(traj, phi, t1, t2, &nu, method)?
        };
        total += r;
    }
    Ok(total)
}

fn interval_residual(
    traj: &Trajectory,
    phi: &TestFunction,
    t1: f64,
    t2: f64,
    nu: &dyn Reference,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Quadrature => residual_quadrature(traj, phi, t1, t2, nu),
        Method::ClosedForm => residual_closed_form(traj, phi, t1, t2, nu),
    }
}

/// `max_φ |R_φ(ζ, ν_0, 0, T)|` over `family`, using the chained closed form.
pub fn residual_norm(traj: &Trajectory, family: &[TestFunction]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::Residual("empty test-function family".into()));
    }
    family.iter().try_fold(0.0f64, |acc, phi| {
        Ok(acc.max(chained_residual(traj, phi, Method::ClosedForm)?.abs()))
    })
}

/// One line of the residual report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub phi_id: usize,
    pub t1: f64,
    pub t2: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub abs_diff: f64,
}

/// Both residual routes on every internalization interval for every test function.
pub fn residual_report(traj: &Trajectory, family: &[TestFunction]) -> Result<Vec<ResidualRow>> {
    let mut rows = Vec::new();
    for (phi_id, phi) in family.iter().enumerate() {
        for (i, w) in traj.breakpoints.windows(2).enumerate() {
            let (t1, t2) = (w[0], w[1]);
            let nu_measure;
            let nu: &dyn Reference = if i == 0 {
                &traj.problem.initial
            } else {
                let start = traj.snapshot_at(t1).expect("internalization times are snapshots");
                nu_measure = traj.snapshots[start].measure();
                &nu_measure
            };
            let quadrature = residual_quadrature(traj, phi, t1, t2, nu)?;
            let closed_form = residual_closed_form(traj, phi, t1, t2, nu)?;
            rows.push(ResidualRow {
                phi_id,
                t1,
                t2,
                quadrature,
                closed_form,
                abs_diff: (quadrature - closed_form).abs(),
            });
        }
    }
    Ok(rows)
}
