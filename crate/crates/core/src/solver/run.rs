use serde::Serialize;

use super::rhs::System;
use super::state::{init_cohorts, CohortState};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::model::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Requested step size; the effective step divides each interval evenly.
    pub step: f64,
    /// Abundance below which internal cohorts are dropped at internalization times.
    pub prune_epsilon: f64,
    /// Record every `snapshot_stride`-th step (interval ends are always recorded).
    pub snapshot_stride: usize,
}

impl RunOptions {
    pub fn new(step: f64) -> Self {
        RunOptions {
            step,
            prune_epsilon: 0.0,
            snapshot_stride: 1,
        }
    }

    pub fn with_prune_epsilon(self, prune_epsilon: f64) -> Self {
        RunOptions { prune_epsilon, ..self }
    }

    pub fn with_snapshot_stride(self, snapshot_stride: usize) -> Self {
        RunOptions {
            snapshot_stride,
            ..self
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    /// State after any internalization at `t`.
    pub state: CohortState,
    /// State just before internalization, recorded only at internalization times.
    pub pre_event: Option<CohortState>,
}

impl Snapshot {
    pub fn measure(&self) -> DiscreteMeasure {
        self.state.assemble_measure()
    }

    /// The state as a limit from the left: `pre_event` when present.
    pub fn left_state(&self) -> &CohortState {
        self.pre_event.as_ref().unwrap_or(&self.state)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub problem: ProblemSpec,
    /// Effective RK4 step.
    pub step: f64,
    pub steps_per_interval: usize,
    /// `t_0, …, t_n`.
    pub breakpoints: Vec<f64>,
    /// `t_1, …, t_{n−1}`.
    pub internalization_times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub pruned_cohorts: usize,
    pub pruned_mass: f64,
}

impl Trajectory {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a trajectory holds at least the initial snapshot")
    }

    pub fn final_measure(&self) -> DiscreteMeasure {
        self.final_snapshot().measure()
    }

    /// Index of the snapshot recorded at time `t`, if any.
    pub fn snapshot_at(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.problem.horizon.max(1.0);
        let i = self.snapshots.partition_point(|s| s.t < t - tol);
        (i < self.snapshots.len() && (self.snapshots[i].t - t).abs() <= tol).then_some(i)
    }
}

/// Number of equal RK4 steps covering an interval of length `len` with steps no longer than `h`.
pub fn steps_per_interval(len: f64, h: f64) -> usize {
    let ratio = len / h;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (steps as usize).max(1)
}

fn rk4_step(system: &System<'_>, t: f64, h: f64, y: &[f64], scratch: &mut [Vec<f64>; 5]) -> Result<Vec<f64>> {
    let [k1, k2, k3, k4, tmp] = scratch;
    system.eval(t, y, k1)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    system.eval(t + 0.5 * h, tmp, k2)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    system.eval(t + 0.5 * h, tmp, k3)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + h * k3[i];
    }
    system.eval(t + h, tmp, k4)?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates the EBT system from `t = 0` to `T`, internalizing the boundary
/// cohort at `t_1, …, t_{n−1}`.
pub fn run(problem: &ProblemSpec, options: &RunOptions) -> Result<Trajectory> {
    problem.validate()?;
    if !(options.step.is_finite() && options.step > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "step size must be positive and finite, got {}",
            options.step
        )));
    }
    if !(options.prune_epsilon.is_finite() && options.prune_epsilon >= 0.0) {
        return Err(Error::InvalidProblem(
            "prune epsilon must be finite and non-negative".into(),
        ));
    }
    let stride = options.snapshot_stride.max(1);
    let breakpoints = problem.interval_breakpoints();
    let n = problem.internalizations;
    let m = steps_per_interval(problem.horizon / n as f64, options.step);
    let h = problem.horizon / n as f64 / m as f64;

    let mut state = init_cohorts(
        &problem.initial,
        problem.initial_cohorts,
        problem.x_b,
        problem.formulation,
    )?;
    let mut trajectory = Trajectory {
        problem: problem.clone(),
        step: h,
        steps_per_interval: m,
        internalization_times: breakpoints[1..n].to_vec(),
        breakpoints: breakpoints.clone(),
        snapshots: vec![Snapshot {
            t: 0.0,
            state: state.clone(),
            pre_event: None,
        }],
        pruned_cohorts: 0,
        pruned_mass: 0.0,
    };

    for i in 0..n {
        let (t0, t1) = (breakpoints[i], breakpoints[i + 1]);
        let len = state.pack().len();
        let mut scratch = [
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
        ];
        let mut y = state.pack();
        for k in 1..=m {
            let t_prev = t0 + (k - 1) as f64 * h;
            let t = if k == m { t1 } else { t0 + k as f64 * h };
            let system = System::new(problem, &state);
            y = rk4_step(&system, t_prev, h, &y, &mut scratch)?;
            state.unpack(t, &y)?;
            if k == m && i + 1 < n {
                let pre = state.clone();
                let (pruned, report) = state.internalize().prune(options.prune_epsilon);
                trajectory.pruned_cohorts += report.removed;
                trajectory.pruned_mass += report.mass_lost;
                state = pruned;
                trajectory.snapshots.push(Snapshot {
                    t,
                    state: state.clone(),
                    pre_event: Some(pre),
                });
            } else if k == m || k % stride == 0 {
                trajectory.snapshots.push(Snapshot {
                    t,
                    state: state.clone(),
                    pre_event: None,
                });
            }
        }
    }
    Ok(trajectory)
}
