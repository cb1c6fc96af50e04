use serde::Serialize;

use crate::model::ProblemSpec;

/// `ψ(s) = exp(1 − 1/(1 − s²))` for `|s| < 1`, else 0. Peak value 1 at `s = 0`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `ψ'(s)`.
pub fn bump_slope(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let u = 1.0 - s * s;
        -2.0 * s / (u * u) * bump(s)
    }
}

/// `sup |ψ'|`, attained where `1 − s² = 1 − 1/√3`.
pub fn bump_slope_sup() -> f64 {
    let s = 3f64.powf(-0.25);
    bump_slope(-s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalProfile {
    Flat,
    /// `ψ((t − center)/half_width)`.
    Window {
        center: f64,
        half_width: f64,
    },
}

impl TemporalProfile {
    fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            TemporalProfile::Flat => (1.0, 0.0),
            TemporalProfile::Window { center, half_width } => {
                let s = (t - center) / half_width;
                (bump(s), bump_slope(s) / half_width)
            }
        }
    }
}

/// `φ(x, t) = ψ((x − center)/half_width) · τ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
    pub profile: TemporalProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestValue {
    pub value: f64,
    pub d_dx: f64,
    pub d_dt: f64,
}

impl TestFunction {
    pub fn flat(center: f64, half_width: f64) -> Self {
        TestFunction {
            center,
            half_width,
            profile: TemporalProfile::Flat,
        }
    }

    pub fn windowed(center: f64, half_width: f64, t_center: f64, t_half_width: f64) -> Self {
        TestFunction {
            center,
            half_width,
            profile: TemporalProfile::Window {
                center: t_center,
                half_width: t_half_width,
            },
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn eval(&self, x: f64, t: f64) -> TestValue {
        let s = (x - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return TestValue {
                value: 0.0,
                d_dx: 0.0,
                d_dt: 0.0,
            };
        }
        let (tau, tau_t) = self.profile.eval(t);
        let psi = bump(s);
        TestValue {
            value: psi * tau,
            d_dx: bump_slope(s) / self.half_width * tau,
            d_dt: psi * tau_t,
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t).value
    }

    /// `‖φ(·, t)‖_∞ + ‖∂φ/∂x(·, t)‖_∞`, the norm dual to the flat metric.
    pub fn w1_inf_norm(&self, t: f64) -> f64 {
        let (tau, _) = self.profile.eval(t);
        tau.abs() * (1.0 + bump_slope_sup() / self.half_width)
    }
}

/// Fixed family used for residual norms and functional errors.
///
/// Eight time-flat bumps centred at `x_b + k·s` (`k = 0..7`) with half-width
/// `s`, so neighbouring supports overlap and every point of the reachable span
/// is covered, plus two bumps with a time window peaking at `T/2`, centred off
/// the birth size so that `∂φ/∂x(x_b) ≠ 0`. The span `L` runs from `x_b` to the
/// furthest reachable state (at least 1), and `s = L/7`.
pub fn standard_family(problem: &ProblemSpec) -> Vec<TestFunction> {
    let x_b = problem.x_b;
    let extent = problem
        .reachable_extent()
        .unwrap_or_else(|| problem.initial.support().map_or(x_b, |(_, hi)| hi.max(x_b)) + problem.horizon);
    let span = (extent - x_b).max(1.0);
    let s = span / 7.0;
    let t = problem.horizon;
    let mut family: Vec<TestFunction> = (0..8).map(|k| TestFunction::flat(x_b + k as f64 * s, s)).collect();
    family.push(TestFunction::windowed(x_b + 0.5 * s, s, 0.5 * t, t));
    family.push(TestFunction::windowed(x_b + 0.5 * span, s, 0.5 * t, t));
    family
}
